#include "hrt/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hrt/error.hpp"
#include "hrt/rankpaths.hpp"

namespace hrt {

namespace {

struct Prepared {
    ArFit fit;
    DensityPtr g;
    PartialSumPaths paths;
};

Prepared prepare(const TimeSeries& y, const ReferenceChoice& choice, const RankTestOptions& opts) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    Prepared out;
    out.fit = fit_ar(y, opts.p, false);
    if (opts.theory_mode) out.fit = discretize(out.fit, y.size());
    if (choice.estimated()) {
        // The kernel estimate needs sigma_f first; build the paths once with a
        // placeholder reference to get it, then rebuild with the estimate.
        const double sigma_f = build_paths(out.fit, GaussianDensity{}).sigma_f_hat;
        out.g = fit_kernel_density(out.fit.residuals, sigma_f);
    } else {
        out.g = make_reference(choice.name);
    }
    out.paths = build_paths(out.fit, *out.g);
    return out;
}

void fill_common(TestResult& r, const Prepared& prep, const RankTestOptions& opts) {
    r.reference = std::string(prep.g->name());
    r.alpha = opts.alpha;
    r.nuisance.sigma_f_hat = prep.paths.sigma_f_hat;
    r.nuisance.sigma_eps_phi_g_hat = prep.paths.sigma_eps_phi_g_hat;
    r.nuisance.j_g = prep.g->fisher_info();
}

bool polynomial_applies(const ReferenceChoice& g, const RankTestOptions& opts) {
    if (opts.model) return true;
    return !g.estimated() && opts.alpha == 0.05 && opts.h_bar.scaled && opts.h_bar.value == -7.0;
}

void set_critical_value(TestResult& r, const ReferenceChoice& g, const RankTestOptions& opts, bool symmetric,
                        double lambda) {
    if (opts.model) {
        const auto& m = *opts.model;
        if (m.reference_name != g.name || m.symmetric != symmetric || std::abs(m.alpha - opts.alpha) > 1e-12 ||
            !opts.h_bar.scaled || opts.h_bar.value != m.h_bar_per_sigma) {
            throw ParameterError("critical-value model (" + m.reference_name +
                                 (m.symmetric ? ", signed" : ", rank") +
                                 ") does not match the test configuration (reference, rank type, alpha or h_bar rule)");
        }
    }
    if (opts.cv_mode == CvMode::polynomial && polynomial_applies(g, opts)) {
        const CriticalValueModel& model = opts.model ? *opts.model : default_cv_model(g.name, symmetric);
        r.critical_value = model.evaluate(r.nuisance.sigma_used);
        r.cv_source = "polynomial:" + model.source;
        return;
    }
    if (opts.cv_mode == CvMode::polynomial) {
        r.notices.emplace_back("no fitted critical-value polynomial for this configuration; simulated instead");
    }
    const LimitStatisticParams params{r.h_bar, r.nuisance.sigma_used, r.nuisance.j_g, lambda, symmetric};
    r.critical_value = critical_value(params, opts.alpha, opts.sim);
    r.cv_source = "simulated";
}

double clamp_with_notice(TestResult& r) {
    const double raw = r.nuisance.sigma_eps_phi_g_hat;
    const double used = clamp_sigma(raw, r.nuisance.j_g);
    if (used != raw) {
        std::ostringstream os;
        os << "sigma_eps_phi_g_hat = " << raw << " clamped to " << used;
        r.notices.push_back(os.str());
    }
    r.nuisance.sigma_used = used;
    return used;
}

}  // namespace

TestResult ahrt(const TimeSeries& y, const ReferenceChoice& g, const RankTestOptions& opts) {
    const Prepared prep = prepare(y, g, opts);
    TestResult r;
    r.test_name = "ahrt";
    fill_common(r, prep, opts);
    const double s = clamp_with_notice(r);
    const double j = r.nuisance.j_g;
    const auto& w = prep.paths.w_eps;
    const double int_w = integral_ds(w);
    const double ratio = j / (s * s);
    r.delta_hat = stochastic_integral(w, prep.paths.b_phi_g) / s + w.end_value() * int_w;
    r.info_hat = ratio * integral_sq_ds(w) - int_w * int_w * (ratio - 1.0);
    r.h_bar = opts.h_bar.resolve(s);
    r.statistic = r.h_bar * r.delta_hat - 0.5 * r.h_bar * r.h_bar * r.info_hat;
    set_critical_value(r, g, opts, false, 1.0);
    r.reject = r.statistic >= r.critical_value;
    return r;
}

TestResult ahrt_signed(const TimeSeries& y, const ReferenceChoice& g, const RankTestOptions& opts) {
    if (g.estimated()) {
        throw ParameterError("ahrt-signed: the signed-rank test needs a symmetric reference density, "
                             "'estimated' is not symmetric");
    }
    if (!make_reference(g.name)->symmetric()) {
        throw ParameterError("ahrt-signed: reference density '" + g.name + "' is not symmetric about zero");
    }
    const Prepared prep = prepare(y, g, opts);
    TestResult r;
    r.test_name = "ahrt-signed";
    fill_common(r, prep, opts);
    const double s = clamp_with_notice(r);
    const auto& w = prep.paths.w_eps;
    r.delta_hat = stochastic_integral(w, prep.paths.w_phi_g) / s;
    r.info_hat = r.nuisance.j_g / (s * s) * integral_sq_ds(w);
    r.h_bar = opts.h_bar.resolve(s);
    r.statistic = r.h_bar * r.delta_hat - 0.5 * r.h_bar * r.h_bar * r.info_hat;
    set_critical_value(r, g, opts, true, 1.0);
    r.reject = r.statistic >= r.critical_value;
    return r;
}

double lambda_hat(double j_fg, double sigma_eps_phi_g, double j_g) {
    const double s2 = sigma_eps_phi_g * sigma_eps_phi_g;
    const double denom = j_g - s2;
    if (!(denom > 0.0)) throw IllConditionedError("lambda_hat: J_g - sigma_eps_phi_g^2 must be positive");
    return (j_fg * sigma_eps_phi_g - s2) / denom;
}

double jfg_plugin(std::span<const double> residuals, const ReferenceDensity& g) {
    const std::size_t n = residuals.size();
    if (n == 0) throw ParameterError("jfg_plugin: empty residual vector");
    const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double e : residuals) ss += (e - mean) * (e - mean);
    const double sigma_f = std::sqrt(ss / static_cast<double>(n));
    if (!(sigma_f > 0.0)) throw DegenerateSampleError("jfg_plugin: residuals are constant");
    const auto f_hat = fit_kernel_density(residuals, sigma_f);
    const RankData ranks = compute_ranks(residuals);
    const auto nl = static_cast<long>(n);
    const auto scores = rank_scores(g, nl, nl + 1, false);
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sum += sigma_f * f_hat->score(residuals[t]) * (*scores)[static_cast<std::size_t>(ranks.ranks[t] - 1)];
    }
    const double bound = 10.0 * std::sqrt(f_hat->fisher_info() * g.fisher_info());
    return std::clamp(sum / static_cast<double>(n), -bound, bound);
}

TestResult hrt(const TimeSeries& y, const ReferenceChoice& g, const RankTestOptions& opts,
               std::optional<double> jfg_hat, bool symmetric) {
    if (symmetric && (g.estimated() || !make_reference(g.name)->symmetric())) {
        throw ParameterError("hrt: the signed-rank variant needs a symmetric built-in reference density");
    }
    const Prepared prep = prepare(y, g, opts);
    TestResult r;
    r.test_name = symmetric ? "hrt-signed" : "hrt";
    fill_common(r, prep, opts);
    const double j = r.nuisance.j_g;
    const double s = prep.paths.sigma_eps_phi_g_hat;
    OrthogonalPaths orth;
    try {
        orth = orthogonalize(prep.paths, j);
    } catch (const IllConditionedError& e) {
        throw IllConditionedError(std::string(e.what()) + "; the AHRT avoids this estimate and is recommended here");
    }
    r.nuisance.sigma_used = s;
    r.nuisance.j_fg_hat = jfg_hat ? *jfg_hat : jfg_plugin(prep.fit.residuals, *prep.g);
    const double lam = lambda_hat(r.nuisance.j_fg_hat, s, j);
    r.nuisance.lambda_hat = lam;

    const auto& w = prep.paths.w_eps;
    const double root_excess = std::sqrt(j / (s * s) - 1.0);
    const double q = integral_sq_ds(w);
    const double m = integral_ds(w);
    const double delta_eps = stochastic_integral(w, w);
    if (symmetric) {
        r.delta_hat = delta_eps + lam * root_excess * stochastic_integral(w, orth.w_perp);
        r.info_hat = (1.0 + lam * lam * (j / (s * s) - 1.0)) * q;
    } else {
        r.delta_hat = delta_eps + lam * root_excess * stochastic_integral(w, orth.b_perp);
        r.info_hat = q + lam * lam * (j / (s * s) - 1.0) * (q - m * m);
    }
    r.h_bar = opts.h_bar.resolve(s);
    r.statistic = r.h_bar * r.delta_hat - 0.5 * r.h_bar * r.h_bar * r.info_hat;
    const LimitStatisticParams params{r.h_bar, s, j, lam, symmetric};
    r.critical_value = critical_value(params, opts.alpha, opts.sim);
    r.cv_source = "simulated";
    r.reject = r.statistic >= r.critical_value;
    return r;
}

}  // namespace hrt
