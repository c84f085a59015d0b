#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "hrt/error.hpp"
#include "hrt/mcharness.hpp"

using namespace hrt;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double skew = 0.0;
};

Moments sample_moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    Moments m;
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : x) {
        m2 += (v - m.mean) * (v - m.mean);
        m3 += std::pow(v - m.mean, 3);
    }
    m.var = m2 / n;
    m.skew = (m3 / n) / std::pow(m.var, 1.5);
    return m;
}

}  // namespace

TEST_CASE("innovation laws") {
    for (const char* name : {"gaussian", "laplace", "t3", "t4", "skewnormal"}) {
        const auto law = make_innovation(name);
        Engine rng = substream(1, name_hash(name), 0);
        const Moments m = sample_moments(draw_innovations(*law, 400000, rng));
        CHECK(std::abs(m.mean) < 0.01);
        CHECK(std::abs(m.var - 1.0) < (std::string(name) == "t3" || std::string(name) == "t4" ? 0.1 : 0.02));
        CHECK(law->in_family());
    }
    CHECK(!make_innovation("t1")->in_family());
    CHECK(!make_innovation("t2")->in_family());
    CHECK(!make_innovation("skew-t4")->in_family());
    CHECK_THROWS_AS(make_innovation("pearson"), ParameterError);

    Engine rng = substream(2, 0, 0);
    const Moments sn = sample_moments(draw_innovations(*make_innovation("skewnormal"), 400000, rng));
    CHECK(std::abs(sn.skew - 0.8145) < 0.03);
    CHECK(skew_normal_skewness(skew_normal_delta(0.8145)) == doctest::Approx(0.8145).epsilon(1e-10));
    CHECK(skew_t4_skewness(skew_t4_delta(2.7)) == doctest::Approx(2.7).epsilon(1e-10));
    CHECK_THROWS_AS(skew_normal_delta(1.5), ParameterError);
}

TEST_CASE("data-generating process") {
    DgpConfig cfg;
    cfg.t_len = 100;
    cfg.h = -7.0;
    std::vector<double> e(100, 0.0);
    e[0] = 1.0;
    const TimeSeries y = build_series(cfg, e);
    CHECK(y[0] == 1.0);
    CHECK(y[1] == doctest::Approx(0.93));
    CHECK(y[5] == doctest::Approx(std::pow(0.93, 5)));

    cfg.h = 0.0;
    cfg.t_len = 20000;
    cfg.mu = 3.0;
    Engine rng = substream(4, 0, 0);
    const TimeSeries rw = generate(cfg, rng);
    CHECK(rw[0] != 0.0);
    const Moments dm = sample_moments(rw.differences());
    CHECK(std::abs(dm.var - 1.0) < 0.03);

    cfg.h = 1.0;
    CHECK_THROWS_AS(generate(cfg, rng), ParameterError);
    cfg.h = 0.0;
    cfg.t_len = 2;
    CHECK_THROWS_AS(generate(cfg, rng), ParameterError);
    cfg.t_len = 100;
    cfg.error_model = {"explosive", {1.2}, {}};
    CHECK_THROWS_AS(generate(cfg, rng), ParameterError);
    cfg.error_model = {"non-invertible", {}, {-1.0}};
    CHECK_THROWS_AS(generate(cfg, rng), ParameterError);
}

TEST_CASE("ARMA(1,1) error autocorrelation") {
    DgpConfig cfg;
    cfg.t_len = 100000;
    cfg.error_model = make_error_model("arma");
    Engine rng = substream(6, 0, 0);
    const auto dv = generate(cfg, rng).differences();
    double c0 = 0.0;
    double c1 = 0.0;
    for (std::size_t t = 1; t < dv.size(); ++t) {
        c0 += dv[t] * dv[t];
        c1 += dv[t] * dv[t - 1];
    }
    // phi = theta = -0.5: rho(1) = (1 + phi theta)(phi + theta) / (1 + 2 phi theta + theta^2)
    const double phi = -0.5, theta = -0.5;
    const double acf1 = (1 + phi * theta) * (phi + theta) / (1 + 2 * phi * theta + theta * theta);
    CHECK(std::abs(c1 / c0 - acf1) < 0.02);
    CHECK_THROWS_AS(make_error_model("garch"), ParameterError);
    CHECK(companion_spectral_radius({0.5, 0.3}) == doctest::Approx(0.8521).epsilon(1e-3));
}

TEST_CASE("test labels") {
    CHECK(parse_study_test("ahrt-signed-laplace").name == "ahrt-signed");
    CHECK(parse_study_test("ahrt-signed-laplace").reference == "laplace");
    CHECK(parse_study_test("hrt-t3").label() == "hrt-t3");
    CHECK(parse_study_test("ers").label() == "ers");
    CHECK(parse_study_test("ahrt-estimated").reference == "estimated");
    CHECK_THROWS_AS(parse_study_test("kpss"), ParameterError);
    CHECK_THROWS_AS(parse_study_test("ahrt-cauchy"), ParameterError);
}

TEST_CASE("CSV rows") {
    StudyRow row;
    row.test = "ahrt-gaussian";
    row.innovation = "gaussian";
    row.error_model = "arma(-0.5,-0.5)";
    row.t_len = 100;
    row.h = -2.5;
    row.n_rep = 2000;
    row.reject_rate = 0.25;
    row.mc_se = 0.0096825;
    CHECK(study_csv_header() == "test,innovation,error_model,T,h,n_rep,reject_rate,mc_se");
    CHECK(study_csv_row(row) == "ahrt-gaussian,gaussian,\"arma(-0.5,-0.5)\",100,-2.5,2000,0.250000,0.009683");
}

TEST_CASE("study runs") {
    StudyConfig cfg;
    cfg.tests = {{"df-rho", ""}};
    cfg.dgps = {{"gaussian", ErrorModel::iid(), 100}};
    cfg.h_grid = {0.0};
    cfg.n_rep = 20000;
    cfg.seed = 12;
    SUBCASE("DF-rho size with the tabulated cutoff") {
        const StudyResult r = run_study(cfg);
        REQUIRE(r.rows.size() == 1);
        CHECK(std::abs(r.rows[0].reject_rate - 0.05) <= 0.005);
        CHECK(r.rows[0].mc_se == doctest::Approx(std::sqrt(0.05 * 0.95 / 20000)).epsilon(0.1));
    }
    SUBCASE("empty configurations") {
        cfg.n_rep = 0;
        CHECK_THROWS_AS(run_study(cfg), ParameterError);
        cfg.n_rep = 10;
        cfg.h_grid.clear();
        CHECK_THROWS_AS(run_study(cfg), ParameterError);
    }
    SUBCASE("output does not depend on the worker count") {
        cfg.tests = {{"ahrt", "gaussian"}, {"ahrt-signed", "laplace"}, {"ers", ""}};
        cfg.dgps = {{"t3", ErrorModel::iid(), 100}, {"laplace", ErrorModel::paper_arma(), 100}};
        cfg.h_grid = {0.0, -10.0};
        cfg.n_rep = 300;
        cfg.p = 1;
        auto csv = [&](unsigned workers) {
            cfg.workers = workers;
            std::ostringstream os;
            for (const auto& row : run_study(cfg).rows) os << study_csv_row(row) << "\n";
            return os.str();
        };
        CHECK(csv(1) == csv(4));
    }
    SUBCASE("stop flag") {
        std::atomic<bool> stop{true};
        const StudyResult r = run_study(cfg, {}, &stop);
        CHECK(r.interrupted);
        CHECK(r.rows.empty());
    }
}

TEST_CASE("presets") {
    const StudyConfig desk = study_preset("paper-desk");
    CHECK(desk.dgps.size() * desk.tests.size() == 9);
    CHECK(desk.n_rep == 2000);
    CHECK(desk.dgps[0].t_len == 100);
    const StudyConfig fig1 = study_preset("paper-fig1");
    CHECK(fig1.n_rep == 20000);
    CHECK(fig1.h_grid.front() == 0.0);
    CHECK(fig1.h_grid.back() == -30.0);
    CHECK_THROWS_AS(study_preset("paper-fig9"), ParameterError);
}
