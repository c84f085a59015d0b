#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hrt/densities.hpp"
#include "hrt/error.hpp"
#include "hrt/limitsim.hpp"

using namespace hrt;

namespace {

// Power of the Gaussian point-optimal test at h, simulated directly under dW = h W ds + dZ.
double ou_power(double h, std::size_t m, std::size_t reps, double alpha, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const double dt = 1.0 / static_cast<double>(m);
    const double sd = std::sqrt(dt);
    auto stat = [&](double drift) {
        double w = 0.0;
        double q = 0.0;
        double wdw = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double dw = drift * w * dt + sd * z(rng);
            q += w * w * dt;
            wdw += w * dw;
            w += dw;
        }
        return h * wdw - 0.5 * h * h * q;
    };
    std::vector<double> null(reps);
    for (double& v : null) v = stat(0.0);
    std::sort(null.begin(), null.end());
    const double c = null[static_cast<std::size_t>((1.0 - alpha) * static_cast<double>(reps - 1))];
    std::size_t hits = 0;
    for (std::size_t r = 0; r < reps; ++r) hits += stat(h) >= c ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(reps);
}

struct Raw {
    double int_w_dw = 0.0;
    double int_w_sq = 0.0;
    double int_w = 0.0;
    double int_w_dbridge = 0.0;
    double int_w_dperp = 0.0;
};

// Functionals recomputed from stored increments.
Raw recompute(const std::vector<double>& dw, const std::vector<double>& dperp) {
    const double m = static_cast<double>(dw.size());
    double perp_end = 0.0;
    for (double d : dperp) perp_end += d;
    Raw r;
    double w = 0.0;
    for (std::size_t k = 0; k < dw.size(); ++k) {
        r.int_w_sq += w * w / m;
        r.int_w += w / m;
        r.int_w_dw += w * dw[k];
        r.int_w_dperp += w * dperp[k];
        r.int_w_dbridge += w * (dperp[k] - perp_end / m);
        w += dw[k];
    }
    return r;
}

}  // namespace

TEST_CASE("single-step paths") {
    Engine rng = substream(1, 2, 3);
    const LimitSample s = draw_limit_sample(1, rng);
    CHECK(s.core.int_w_dw == 0.0);
    CHECK(s.core.int_w_sq == 0.0);
    CHECK(s.core.w_end == s.w_eps[0]);
    CHECK_THROWS_AS(draw_limit_sample(0, rng), ParameterError);
    CHECK_THROWS_AS(draw_limit_sample(10, rng, 0.5), ParameterError);
}

TEST_CASE("Brownian moments") {
    const std::size_t n = 100000;
    double end_sq = 0.0;
    double int_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Engine rng = substream(5, 0, i);
        const LimitFunctionals f = draw_limit_functionals(100, rng);
        end_sq += f.w_end * f.w_end;
        int_sq += f.int_w_sq;
    }
    CHECK(std::abs(end_sq / n - 1.0) < 0.02);
    CHECK(std::abs(int_sq / n - 0.5) < 0.02);
}

TEST_CASE("limit statistic against raw increments") {
    Engine rng = substream(9, 0, 0);
    const LimitSample s = draw_limit_sample(400, rng, 2.0);
    const Raw raw = recompute(s.w_eps, s.w_perp);
    CHECK(s.core.int_w_dw == doctest::Approx(raw.int_w_dw).epsilon(1e-12));
    CHECK(s.core.int_w_db_perp == doctest::Approx(raw.int_w_dbridge).epsilon(1e-12));
    CHECK(s.core.int_w_dw_perp == doctest::Approx(raw.int_w_dperp).epsilon(1e-12));

    const double h = -7.0;
    CHECK(ahrt_limit_statistic(s, 0.0, 0.8, 2.0, 1.0, false) == 0.0);

    const double lambda0 = h * raw.int_w_dw - 0.5 * h * h * raw.int_w_sq;
    CHECK(ahrt_limit_statistic(s, h, 0.8, 2.0, 0.0, false) == doctest::Approx(lambda0).epsilon(1e-12));
    // r = J_g / sigma^2 = 1: only the ERS-type functional is left
    CHECK(ahrt_limit_statistic(s, h, 1.0, 1.0, 1.0, false) == doctest::Approx(lambda0).epsilon(1e-12));

    const double sigma = 0.8;
    const double lambda = 0.6;
    const double k = std::sqrt(2.0 / (sigma * sigma) - 1.0);
    const double delta = raw.int_w_dw + lambda * k * raw.int_w_dbridge;
    const double info = raw.int_w_sq + lambda * lambda * k * k * (raw.int_w_sq - raw.int_w * raw.int_w);
    CHECK(ahrt_limit_statistic(s, h, sigma, 2.0, lambda, false) ==
          doctest::Approx(h * delta - 0.5 * h * h * info).epsilon(1e-12));
    const double delta_s = raw.int_w_dw + lambda * k * raw.int_w_dperp;
    const double info_s = (1.0 + lambda * lambda * k * k) * raw.int_w_sq;
    CHECK(ahrt_limit_statistic(s, h, sigma, 2.0, lambda, true) ==
          doctest::Approx(h * delta_s - 0.5 * h * h * info_s).epsilon(1e-12));

    CHECK_THROWS_AS(ahrt_limit_statistic(s, h, 1.5, 2.0, 1.0, false), IllConditionedError);
    CHECK_THROWS_AS(ahrt_limit_statistic(s, h, 0.0, 2.0, 1.0, false), IllConditionedError);
}

TEST_CASE("upper quantile") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = 100 - i;
    CHECK(upper_quantile(v, 0.05) == doctest::Approx(95.05));
    CHECK(upper_quantile(v, 0.5) == doctest::Approx(50.5));
}

TEST_CASE("critical values") {
    const LimitSimOptions opts{20000, 2500, 20240601, 0};
    // Gaussian g, sigma = 0.5: the published polynomial gives 1.41 here.
    CHECK(std::abs(critical_value({-3.5, 0.5, 1.0, 1.0, false}, 0.05, opts) - 1.41) < 0.10);
    // sigma = sqrt(J_g): L = -P/2 + 3.5 with P the ERS limit statistic, whose 5% point is 3.26.
    CHECK(std::abs(critical_value({-7.0, 1.0, 1.0, 1.0, false}, 0.05, opts) - (3.5 - 3.26 / 2.0)) < 0.10);
    CHECK_THROWS_AS(critical_value({-7.0, 1.0, 1.0, 1.0, false}, 0.05, {999, 100, 1, 0}), ParameterError);
    CHECK_THROWS_AS(critical_value({-7.0, 1.0, 1.0, 1.0, false}, 1.0, opts), ParameterError);
}

TEST_CASE("critical-value polynomials") {
    const LimitSimOptions opts{4000, 500, 77, 0};
    const auto lap = fit_cv_polynomial("laplace", 0.05, false, 0.05, opts);
    const auto t3 = fit_cv_polynomial("t3", 0.05, false, 0.05, opts);
    for (double s = 0.1; s < std::sqrt(2.0); s += 0.1) CHECK(std::abs(lap.evaluate(s) - t3.evaluate(s)) < 0.1);
    CHECK(lap.domain_hi == doctest::Approx(std::sqrt(2.0)));

    CHECK_THROWS_AS(fit_cv_polynomial("gaussian", 0.05, false, 0.5, opts), ParameterError);
    CHECK_THROWS_AS(fit_cv_polynomial("gaussian", 0.05, false, 0.0, opts), ParameterError);
    CHECK_THROWS_AS(fit_cv_polynomial("cauchy", 0.05, false, 0.05, opts), ParameterError);

    const auto& g = default_cv_model("gaussian", false);
    CHECK(g.domain_lo == 0.0);
    CHECK(g.domain_hi == 1.0);
    CHECK(default_cv_model("t3", true).domain_hi == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(g.evaluate(1.2), DomainError);
    const auto& paper = paper_table1_model("gaussian");
    CHECK(paper.evaluate(1.0) == doctest::Approx(0.96 + 1.88 - 3.98 + 6.74 - 5.45));
    CHECK(paper.evaluate(0.5) == doctest::Approx(0.96 + 0.94 - 0.995 + 0.8425 - 0.340625));
    CHECK_THROWS_AS(default_cv_model("estimated", false), ParameterError);

    const CriticalValueModel back = parse_model(format_model(lap));
    CHECK(back.reference_name == "laplace");
    CHECK(back.symmetric == lap.symmetric);
    for (int i = 0; i < 5; ++i) CHECK(back.coefficients[i] == doctest::Approx(lap.coefficients[i]).epsilon(1e-6));
    CHECK_THROWS(parse_model("cv_model 1\nreference gaussian\n"));
}

TEST_CASE("built-in polynomial follows the simulated curve") {
    const LimitSimOptions opts{20000, 2500, 20240601, 0};
    for (bool symmetric : {false, true}) {
        for (const char* name : {"gaussian", "laplace"}) {
            const auto& model = default_cv_model(name, symmetric);
            const double j = make_reference(name)->fisher_info();
            for (double s : {0.3, 0.6, 0.9}) {
                const double sim = critical_value({-7.0 * s, s, j, 1.0, symmetric}, 0.05, opts);
                CHECK(std::abs(model.evaluate(s) - sim) < 0.1);
            }
        }
    }
}

TEST_CASE("power envelope") {
    const LimitSimOptions opts{40000, 1000, 31, 0};
    const std::vector<double> grid{0.0, -5.0, -10.0, -15.0, -20.0, -25.0, -30.0};

    const auto gauss = power_envelope(1.0, grid, 0.05, false, opts);
    CHECK(gauss[0] == 0.05);
    CHECK(std::abs(gauss[1] - ou_power(-5.0, 1000, 20000, 0.05, 101)) < 0.02);
    CHECK(std::abs(gauss[2] - ou_power(-10.0, 1000, 20000, 0.05, 102)) < 0.02);

    const auto lap = power_envelope(2.0, grid, 0.05, false, opts);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(gauss[i] >= gauss[i - 1] - 0.01);
        CHECK(lap[i] >= lap[i - 1] - 0.01);
        CHECK(lap[i] >= gauss[i] - 0.01);
    }
    CHECK_THROWS_AS(power_envelope(0.5, grid, 0.05, false, opts), ParameterError);
}

TEST_CASE("asymptotic power of the limit tests") {
    const LimitSimOptions opts{40000, 1000, 31, 0};
    const std::vector<double> h7{-7.0};

    SUBCASE("g = f touches the envelope at h_bar") {
        const double env = power_envelope(2.0, h7, 0.05, false, opts)[0];
        const double test = asymptotic_test_power({2.0, 2.0, 1.0}, {2.0, 1.0, -7.0, false}, h7, 0.05, opts)[0];
        CHECK(std::abs(env - test) < 0.015);
    }
    SUBCASE("Gaussian f stays below the envelope") {
        const std::vector<double> grid{0.0, -5.0, -10.0, -20.0};
        const double s = 0.8;
        const auto test = asymptotic_test_power({1.0, s, s}, {2.0, 1.0, -7.0 * s, false}, grid, 0.05, opts);
        const auto env = power_envelope(1.0, grid, 0.05, false, opts);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(test[i] <= env[i] + 0.01);
        CHECK(test[0] == doctest::Approx(0.05).epsilon(0.1));
    }
    SUBCASE("Laplace f, Gaussian g beats ERS") {
        const auto cm = cross_moments(LaplaceDensity{}, GaussianDensity{});
        const double ahrt =
            asymptotic_test_power({2.0, cm.j_fg, cm.sigma_eps_phi_g}, {1.0, 1.0, -7.0 * cm.sigma_eps_phi_g, false},
                                  h7, 0.05, opts)[0];
        const double ers = ers_asymptotic_power(2.0, h7, 0.05, opts)[0];
        CHECK(ahrt >= ers + 0.03);
    }
    SUBCASE("worker count does not change the result") {
        const std::vector<double> grid{-3.0, -9.0};
        const LimitSimOptions one{3000, 200, 5, 1};
        const LimitSimOptions three{3000, 200, 5, 3};
        CHECK(asymptotic_test_power({2.0, 1.5, 0.9}, {2.0, 1.0, -6.3, false}, grid, 0.05, one) ==
              asymptotic_test_power({2.0, 1.5, 0.9}, {2.0, 1.0, -6.3, false}, grid, 0.05, three));
    }
    SUBCASE("covariance must be positive semidefinite") {
        CHECK_THROWS_AS(asymptotic_test_power({1.0, 1.0, 1.0}, {0.5, 1.0, -7.0, false}, h7, 0.05, opts),
                        ParameterError);
    }
}

TEST_CASE("likelihood-ratio weight has unit mean") {
    const WeightSummary w = likelihood_ratio_weight_mean(1.5, -5.0, {40000, 1000, 31, 0});
    CHECK(std::abs(w.mean - 1.0) <= 3.0 * w.std_error);
    CHECK(w.std_error > 0.0);
}
