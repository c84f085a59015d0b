#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

#include "hrt/error.hpp"
#include "hrt/parallel.hpp"
#include "hrt/rng.hpp"
#include "hrt/stattests.hpp"

namespace hrt {

namespace {

// S(a) = |Y_a - Z_a beta|^2 for the quasi-differenced series.
double quasi_difference_ssr(std::span<const double> y, double a, double beta) {
    double r = y[0] - beta;
    double s = r * r;
    for (std::size_t t = 1; t < y.size(); ++t) {
        r = (y[t] - a * y[t - 1]) - (1.0 - a) * beta;
        s += r * r;
    }
    return s;
}

double quasi_difference_beta(std::span<const double> y, double a) {
    double zy = y[0];
    double zz = 1.0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        zy += (1.0 - a) * (y[t] - a * y[t - 1]);
        zz += (1.0 - a) * (1.0 - a);
    }
    return zy / zz;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
}

}  // namespace

double df_rho_statistic(const TimeSeries& y, int p) {
    const ArFit fit = fit_ar(y, p, true);
    return static_cast<double>(y.size()) * (fit.rho_hat - 1.0);
}

namespace {

struct ErsParts {
    double statistic;
    double omega_sq;
};

ErsParts ers_parts(const TimeSeries& y, int p, double h_bar) {
    if (!(h_bar < 0.0)) throw ParameterError("ers: h_bar must be negative");
    const ArFit fit = fit_ar(y, p, true);
    const double T = static_cast<double>(y.size());
    const double gamma_sum = std::accumulate(fit.gamma_hat.begin(), fit.gamma_hat.end(), 0.0);
    const double lag_one = (1.0 - gamma_sum) * (1.0 - gamma_sum);
    if (lag_one < 1e-8) {
        std::ostringstream os;
        os << "ers: 1 - sum Gamma_hat = " << 1.0 - gamma_sum << " is too close to zero for the long-run variance";
        throw NearUnitRootError(os.str());
    }
    double ss = 0.0;
    for (double e : fit.ols_residuals) ss += e * e;
    const double omega_sq = ss / T / lag_one;
    if (!(omega_sq > 0.0)) throw DegenerateSampleError("ers: residual variance is zero");
    const double a = 1.0 + h_bar / T;
    const auto v = y.values();
    const double beta = quasi_difference_beta(v, a);
    return {(quasi_difference_ssr(v, a, beta) - a * quasi_difference_ssr(v, 1.0, beta)) / omega_sq, omega_sq};
}

}  // namespace

double ers_statistic(const TimeSeries& y, int p, double h_bar) { return ers_parts(y, p, h_bar).statistic; }

std::optional<double> tabulated_df_rho_cv(std::size_t t_len, double alpha) {
    if (alpha != 0.05) return std::nullopt;
    if (t_len == 100) return -13.52;
    if (t_len == 2500) return -14.05;
    return std::nullopt;
}

std::optional<double> tabulated_ers_cv(std::size_t t_len, double alpha, double h_bar) {
    if (alpha != 0.05 || h_bar != -7.0) return std::nullopt;
    if (t_len == 100) return 3.11;
    if (t_len == 2500) return 3.26;
    return std::nullopt;
}

double simulate_competitor_cv(const std::string& test, std::size_t t_len, int p, double alpha, double h_bar,
                              std::size_t n_rep, std::uint64_t seed, unsigned workers) {
    check_alpha(alpha);
    const bool is_df = test == "df-rho";
    if (!is_df && test != "ers") throw ParameterError("simulate_competitor_cv: unknown test '" + test + "'");
    if (n_rep < 100) throw ParameterError("simulate_competitor_cv: need at least 100 replications");
    using Key = std::tuple<std::string, std::size_t, int, double, double, std::size_t, std::uint64_t>;
    static std::mutex mutex;
    static std::map<Key, double> cache;
    const Key key{test, t_len, p, alpha, is_df ? 0.0 : h_bar, n_rep, seed};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    std::vector<double> stat(n_rep);
    const std::uint64_t stream = stream_key(name_hash(test.c_str()), t_len, static_cast<std::uint64_t>(p));
    parallel_for(n_rep, workers, [&](std::size_t i) {
        Engine rng = substream(seed, stream, i);
        std::normal_distribution<double> normal;
        std::vector<double> walk(t_len);
        double level = 0.0;
        for (double& v : walk) {
            level += normal(rng);
            v = level;
        }
        const TimeSeries y(std::move(walk));
        stat[i] = is_df ? df_rho_statistic(y, p) : ers_statistic(y, p, h_bar);
    });
    const double cv = upper_quantile(std::move(stat), 1.0 - alpha);
    std::lock_guard lock(mutex);
    cache.emplace(key, cv);
    return cv;
}

TestResult df_rho(const TimeSeries& y, const CompetitorOptions& opts) {
    check_alpha(opts.alpha);
    TestResult r;
    r.test_name = "df-rho";
    r.alpha = opts.alpha;
    r.reject_when_large = false;
    const ArFit fit = fit_ar(y, opts.p, true);
    r.nuisance.rho_hat = fit.rho_hat;
    r.statistic = static_cast<double>(y.size()) * (fit.rho_hat - 1.0);
    const auto tab = opts.force_simulation ? std::nullopt : tabulated_df_rho_cv(y.size(), opts.alpha);
    if (tab) {
        r.critical_value = *tab;
        r.cv_source = "tabulated";
    } else {
        r.critical_value =
            simulate_competitor_cv("df-rho", y.size(), opts.p, opts.alpha, 0.0, opts.cv_reps, opts.seed, opts.workers);
        r.cv_source = "simulated";
    }
    r.reject = r.statistic <= r.critical_value;
    return r;
}

TestResult ers_test(const TimeSeries& y, const CompetitorOptions& opts) {
    check_alpha(opts.alpha);
    TestResult r;
    r.test_name = "ers";
    r.alpha = opts.alpha;
    r.reject_when_large = false;
    r.h_bar = opts.h_bar;
    const ErsParts parts = ers_parts(y, opts.p, opts.h_bar);
    r.statistic = parts.statistic;
    r.nuisance.omega_sq_hat = parts.omega_sq;
    const auto tab = opts.force_simulation ? std::nullopt : tabulated_ers_cv(y.size(), opts.alpha, opts.h_bar);
    if (tab) {
        r.critical_value = *tab;
        r.cv_source = "tabulated";
    } else {
        r.critical_value = simulate_competitor_cv("ers", y.size(), opts.p, opts.alpha, opts.h_bar, opts.cv_reps,
                                                  opts.seed, opts.workers);
        r.cv_source = "simulated";
    }
    r.reject = r.statistic <= r.critical_value;
    return r;
}

}  // namespace hrt
