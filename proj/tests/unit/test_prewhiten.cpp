#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hrt/error.hpp"
#include "hrt/prewhiten.hpp"

using namespace hrt;

namespace {

TimeSeries integrate(const std::vector<double>& dy) {
    std::vector<double> y(dy.size() + 1, 0.0);
    for (std::size_t t = 0; t < dy.size(); ++t) y[t + 1] = y[t] + dy[t];
    return TimeSeries(y);
}

}  // namespace

TEST_CASE("p = 0 keeps the differences") {
    const TimeSeries y(std::vector<double>{1.0, 3.0, 2.0, 6.0, 5.5});
    const ArFit fit = fit_ar(y, 0, false);
    CHECK(fit.gamma_hat.empty());
    REQUIRE(fit.residuals.size() == 4);
    const std::vector<double> dy{2.0, -1.0, 4.0, -0.5};
    for (std::size_t i = 0; i < dy.size(); ++i) CHECK(fit.residuals[i] == doctest::Approx(dy[i]));
}

TEST_CASE("AR(1) differences are recovered") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    std::vector<double> dy(10000);
    double prev = 0.0;
    for (double& d : dy) {
        d = 0.5 * prev + z(rng);
        prev = d;
    }
    const ArFit fit = fit_ar(integrate(dy), 1, false);
    REQUIRE(fit.gamma_hat.size() == 1);
    CHECK(std::abs(fit.gamma_hat[0] - 0.5) < 0.03);
}

TEST_CASE("p = 8 on ARMA differences") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    const std::size_t T = 500;
    std::vector<double> dy(T - 1);
    double v = 0.0;
    double e_prev = 0.0;
    for (double& d : dy) {
        const double e = z(rng);
        v = -0.5 * v + e - 0.5 * e_prev;
        e_prev = e;
        d = v;
    }
    const ArFit fit = fit_ar(integrate(dy), 8, false);
    CHECK(fit.gamma_hat.size() == 8);
    CHECK(fit.residuals.size() == T - 9);
}

TEST_CASE("levels regression") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z;
    std::vector<double> y(2000);
    double x = 0.0;
    for (double& v : y) {
        x = 0.9 * x + z(rng);
        v = 2.0 + x;
    }
    const ArFit fit = fit_ar(TimeSeries(y), 0, true);
    CHECK(std::abs(fit.rho_hat - 0.9) < 0.03);
    CHECK(fit.ols_residuals.size() == y.size() - 1);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(fit_ar(TimeSeries(std::vector<double>{1.0, 2.0, 3.0}), 1, false), ParameterError);
    CHECK_THROWS_AS(fit_ar(TimeSeries(std::vector<double>(20, 1.0)), 1, true), RankDeficiencyError);
}

TEST_CASE("grid snapping") {
    CHECK(snap_to_grid(0.503, 0.1) == doctest::Approx(0.5));
    CHECK(snap_to_grid(0.0, 0.1) == 0.0);
    CHECK(snap_to_grid(0.05, 0.1) == 0.0);
    CHECK(snap_to_grid(-0.05, 0.1) == 0.0);
    CHECK(snap_to_grid(-0.26, 0.1) == doctest::Approx(-0.3));
    CHECK(snap_to_grid(0.15, 0.1) == doctest::Approx(0.1));
}

TEST_CASE("discretize recomputes the residuals") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    std::vector<double> dy(99);
    double prev = 0.0;
    for (double& d : dy) {
        d = 0.5 * prev + z(rng);
        prev = d;
    }
    const ArFit fit = fit_ar(integrate(dy), 1, false);
    const ArFit snapped = discretize(fit, 100);
    CHECK(snapped.discretized);
    const double g = snapped.gamma_hat[0];
    CHECK(std::abs(g / 0.1 - std::round(g / 0.1)) < 1e-12);
    CHECK(std::abs(g - fit.gamma_hat[0]) <= 0.05 + 1e-12);
    const auto& d = snapped.differences;
    for (std::size_t j = 0; j < snapped.residuals.size(); ++j) {
        CHECK(snapped.residuals[j] == doctest::Approx(d[j + 1] - g * d[j]));
    }
    CHECK_THROWS(discretize(snapped, 100));
}

TEST_CASE("lag polynomial") {
    const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
    const std::vector<double> g{0.5};
    const auto out = apply_lag_polynomial(x, g);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == doctest::Approx(1.5));
    CHECK(out[1] == doctest::Approx(3.0));
    CHECK(out[2] == doctest::Approx(6.0));
}
