#include <doctest.h>

#include <sstream>

#include "hrt/error.hpp"
#include "hrt/series_io.hpp"

using namespace hrt;

TEST_CASE("header detection and column choice") {
    std::istringstream a("date,price\n1,10.5\n2,11\n3,+9.25\n");
    const TimeSeries y = read_series_csv(a, "price");
    REQUIRE(y.size() == 3);
    CHECK(y[2] == 9.25);

    std::istringstream b("date,price\n1,10.5\n2,11\n");
    CHECK(read_series_csv(b, "2")[1] == 11.0);

    std::istringstream c("1.5\n2.5\n\n3.5\n");
    const TimeSeries z = read_series_csv(c);
    CHECK(z.size() == 3);
    CHECK(z[0] == 1.5);

    std::istringstream d("\"a,b\",x\n\"1\",2\n");
    CHECK(read_series_csv(d, "a,b")[0] == 1.0);
}

TEST_CASE("input errors") {
    std::istringstream a("date,price\n1,10\n");
    try {
        read_series_csv(a, "volume");
        FAIL("expected an IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("volume") != std::string::npos);
    }
    std::istringstream b("x\n1\nabc\n");
    CHECK_THROWS_AS(read_series_csv(b), IoError);
    std::istringstream c("x\n");
    CHECK_THROWS_AS(read_series_csv(c), IoError);
    std::istringstream d("1,2\n3\n");
    CHECK_THROWS_AS(read_series_csv(d, "2"), IoError);
    CHECK_THROWS_AS(read_series_csv("/nonexistent/file.csv"), IoError);
    CHECK(split_csv_line("a,\"b\"\"c\",") == std::vector<std::string>{"a", "b\"c", ""});
}
