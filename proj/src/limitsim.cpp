#include "hrt/limitsim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>

#include "hrt/densities.hpp"
#include "hrt/error.hpp"
#include "hrt/parallel.hpp"

namespace hrt {

namespace {

constexpr std::uint64_t kBankStream = name_hash("limit-null-bank");
constexpr std::uint64_t kPowerStream = name_hash("limit-test-power");

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream os;
        os << "alpha = " << alpha << " is outside (0, 1)";
        throw ParameterError(os.str());
    }
}

void check_options(const LimitSimOptions& opts, std::size_t min_rep) {
    if (opts.m == 0) throw ParameterError("limit simulation: grid size m must be positive");
    if (opts.n_rep < min_rep) {
        std::ostringstream os;
        os << "limit simulation: need at least " << min_rep << " replications (got " << opts.n_rep << ")";
        throw ParameterError(os.str());
    }
}

// Self-normalized reweighted rejection frequency sum 1{stat >= c} w / sum w, w = exp(log_weight).
// The weights have unit null mean, but with J_f > 1 and |h| large their sample mean is far from 1
// and the ratio form is much less noisy than dividing by n.
double reweighted_power(std::span<const double> stat, std::span<const double> log_weight, double c) {
    const double top = *std::max_element(log_weight.begin(), log_weight.end());
    if (!std::isfinite(top)) throw NumericalError("reweighted power: non-finite likelihood-ratio weight");
    double hit = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < stat.size(); ++i) {
        const double w = std::exp(log_weight[i] - top);
        total += w;
        if (stat[i] >= c) hit += w;
    }
    return hit / total;
}

}  // namespace

LimitFunctionals draw_limit_functionals(std::size_t m, Engine& rng) {
    if (m == 0) throw ParameterError("draw_limit_functionals: grid size m must be positive");
    std::normal_distribution<double> normal;
    const double step = 1.0 / std::sqrt(static_cast<double>(m));
    LimitFunctionals f;
    double w = 0.0;
    double v = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double dw = step * normal(rng);
        const double dv = step * normal(rng);
        f.int_w_sq += w * w;
        f.int_w += w;
        f.int_w_dw += w * dw;
        f.int_w_dw_perp += w * dv;
        w += dw;
        v += dv;
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    f.int_w_sq *= inv_m;
    f.int_w *= inv_m;
    f.w_end = w;
    f.w_perp_end = v;
    f.int_w_db_perp = f.int_w_dw_perp - v * f.int_w;
    return f;
}

LimitSample draw_limit_sample(std::size_t m, Engine& rng, double j_f) {
    if (m == 0) throw ParameterError("draw_limit_sample: grid size m must be positive");
    if (!(j_f >= 1.0)) throw ParameterError("draw_limit_sample: J_f must be at least 1");
    std::normal_distribution<double> normal;
    const double step = 1.0 / std::sqrt(static_cast<double>(m));
    LimitSample s;
    s.j_f = j_f;
    s.w_eps.resize(m);
    s.w_perp.resize(m);
    s.w_b.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        s.w_eps[k] = step * normal(rng);
        s.w_perp[k] = step * normal(rng);
        s.w_b[k] = step * normal(rng);
    }
    auto& f = s.core;
    double w = 0.0;
    double v = 0.0;
    double b = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        f.int_w_sq += w * w;
        f.int_w += w;
        f.int_w_dw += w * s.w_eps[k];
        f.int_w_dw_perp += w * s.w_perp[k];
        s.int_w_dw_b += w * s.w_b[k];
        w += s.w_eps[k];
        v += s.w_perp[k];
        b += s.w_b[k];
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    f.int_w_sq *= inv_m;
    f.int_w *= inv_m;
    f.w_end = w;
    f.w_perp_end = v;
    f.int_w_db_perp = f.int_w_dw_perp - v * f.int_w;
    s.int_w_db_b = s.int_w_dw_b - b * f.int_w;
    const double k = std::sqrt(j_f - 1.0);
    s.int_w_dw_phi_f = f.int_w_dw + k * s.int_w_dw_b;
    s.int_w_db_phi_f = (f.int_w_dw - w * f.int_w) + k * s.int_w_db_b;
    return s;
}

double ahrt_limit_statistic(const LimitFunctionals& f, const LimitStatisticParams& p) {
    const double root_j = std::sqrt(p.j_g);
    if (!(p.sigma_eps_phi_g > 0.0) || !(p.sigma_eps_phi_g <= root_j * (1.0 + 1e-12))) {
        std::ostringstream os;
        os << "limit statistic: sigma_eps_phi_g = " << p.sigma_eps_phi_g << " outside (0, sqrt(J_g) = " << root_j
           << "]";
        throw IllConditionedError(os.str());
    }
    if (p.h_bar == 0.0) return 0.0;
    const double excess = std::max(0.0, p.j_g / (p.sigma_eps_phi_g * p.sigma_eps_phi_g) - 1.0);
    const double lam2 = p.lambda * p.lambda;
    double delta = 0.0;
    double info = 0.0;
    if (p.symmetric) {
        delta = f.int_w_dw + p.lambda * std::sqrt(excess) * f.int_w_dw_perp;
        info = (1.0 + lam2 * excess) * f.int_w_sq;
    } else {
        delta = f.int_w_dw + p.lambda * std::sqrt(excess) * f.int_w_db_perp;
        info = f.int_w_sq + lam2 * excess * (f.int_w_sq - f.int_w * f.int_w);
    }
    return p.h_bar * delta - 0.5 * p.h_bar * p.h_bar * info;
}

double ahrt_limit_statistic(const LimitSample& s, double h_bar, double sigma_eps_phi_g, double j_g, double lambda,
                            bool symmetric) {
    return ahrt_limit_statistic(s.core, LimitStatisticParams{h_bar, sigma_eps_phi_g, j_g, lambda, symmetric});
}

std::shared_ptr<const NullBank> NullBank::get(const LimitSimOptions& opts) {
    check_options(opts, 1);
    using Key = std::tuple<std::size_t, std::size_t, std::uint64_t>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const NullBank>> cache;
    const Key key{opts.n_rep, opts.m, opts.seed};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    std::vector<LimitFunctionals> draws(opts.n_rep);
    const std::uint64_t stream = stream_key(kBankStream, opts.m);
    parallel_for(opts.n_rep, opts.workers, [&](std::size_t i) {
        Engine rng = substream(opts.seed, stream, i);
        draws[i] = draw_limit_functionals(opts.m, rng);
    });
    auto bank = std::make_shared<const NullBank>(std::move(draws), opts.m);
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(bank)).first->second;
}

double upper_quantile(std::vector<double> values, double alpha) {
    check_alpha(alpha);
    if (values.empty()) throw ParameterError("upper_quantile: empty sample");
    const double pos = (1.0 - alpha) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double a = values[lo];
    if (frac == 0.0 || lo + 1 >= values.size()) return a;
    const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
    return a + frac * (b - a);
}

double critical_value(const LimitStatisticParams& params, double alpha, const LimitSimOptions& opts) {
    check_alpha(alpha);
    check_options(opts, 1000);
    const auto bank = NullBank::get(opts);
    std::vector<double> stat;
    stat.reserve(bank->draws().size());
    for (const auto& f : bank->draws()) stat.push_back(ahrt_limit_statistic(f, params));
    return upper_quantile(std::move(stat), alpha);
}

double CriticalValueModel::evaluate(double sigma) const {
    const double slack = 1e-9;
    if (!(sigma >= domain_lo - slack && sigma <= domain_hi + slack)) {
        std::ostringstream os;
        os << "critical-value model '" << reference_name << "': sigma_eps_phi_g = " << sigma << " outside ["
           << domain_lo << ", " << domain_hi << "]";
        throw DomainError(os.str());
    }
    double v = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) v = v * sigma + *it;
    return v;
}

std::string format_model(const CriticalValueModel& model) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6);
    os << "cv_model 1\n";
    os << "reference " << model.reference_name << "\n";
    os << "source " << (model.source.empty() ? "refit" : model.source) << "\n";
    os << "alpha " << model.alpha << "\n";
    os << "hbar_per_sigma " << model.h_bar_per_sigma << "\n";
    os << "symmetric " << (model.symmetric ? 1 : 0) << "\n";
    os << "domain " << model.domain_lo << " " << model.domain_hi << "\n";
    os << "coefficients";
    for (double c : model.coefficients) os << " " << c;
    os << "\n";
    os << "max_abs_residual " << model.max_abs_residual << "\n";
    return os.str();
}

CriticalValueModel parse_model(std::string_view text) {
    CriticalValueModel model;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = false;
    bool have_coefficients = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        bool ok = true;
        if (key == "cv_model") {
            int version = 0;
            ok = static_cast<bool>(ls >> version) && version == 1;
            header = ok;
        } else if (key == "reference") {
            ok = static_cast<bool>(ls >> model.reference_name);
        } else if (key == "source") {
            ok = static_cast<bool>(ls >> model.source);
        } else if (key == "alpha") {
            ok = static_cast<bool>(ls >> model.alpha);
        } else if (key == "hbar_per_sigma") {
            ok = static_cast<bool>(ls >> model.h_bar_per_sigma);
        } else if (key == "symmetric") {
            int s = 0;
            ok = static_cast<bool>(ls >> s);
            model.symmetric = s != 0;
        } else if (key == "domain") {
            ok = static_cast<bool>(ls >> model.domain_lo >> model.domain_hi);
        } else if (key == "coefficients") {
            for (double& c : model.coefficients) ok = ok && static_cast<bool>(ls >> c);
            have_coefficients = ok;
        } else if (key == "max_abs_residual") {
            ok = static_cast<bool>(ls >> model.max_abs_residual);
        } else {
            throw ParameterError("critical-value model: unknown field '" + key + "'");
        }
        if (!ok) throw ParameterError("critical-value model: malformed line '" + line + "'");
    }
    if (!header || !have_coefficients || model.reference_name.empty()) {
        throw ParameterError("critical-value model: missing header, reference or coefficients");
    }
    return model;
}

CvCurve simulate_cv_curve(double j_g, double alpha, bool symmetric, double grid_step, double h_bar_per_sigma,
                          const LimitSimOptions& opts) {
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
        throw ParameterError("critical-value grid: step must be positive");
    }
    if (!(j_g > 0.0)) throw ParameterError("critical-value grid: J_g must be positive");
    check_alpha(alpha);
    const double top = std::sqrt(j_g);
    CvCurve curve;
    for (long k = 1;; ++k) {
        const double s = grid_step * static_cast<double>(k);
        if (s >= top - 1e-9) break;
        curve.sigma.push_back(s);
    }
    curve.sigma.push_back(top);
    if (curve.sigma.size() < 5) {
        std::ostringstream os;
        os << "critical-value grid: step " << grid_step << " gives " << curve.sigma.size()
           << " points on (0, " << top << "], a degree-4 fit needs at least 5";
        throw ParameterError(os.str());
    }
    check_options(opts, 1000);
    const auto bank = NullBank::get(opts);
    curve.value.resize(curve.sigma.size());
    parallel_for(curve.sigma.size(), opts.workers, [&](std::size_t i) {
        const double s = curve.sigma[i];
        const LimitStatisticParams params{h_bar_per_sigma * s, s, j_g, 1.0, symmetric};
        std::vector<double> stat;
        stat.reserve(bank->draws().size());
        for (const auto& f : bank->draws()) stat.push_back(ahrt_limit_statistic(f, params));
        curve.value[i] = upper_quantile(std::move(stat), alpha);
    });
    return curve;
}

CriticalValueModel fit_cv_polynomial(std::string_view g_name, double alpha, bool symmetric, double grid_step,
                                     const LimitSimOptions& opts, double h_bar_per_sigma) {
    const auto g = make_reference(g_name);
    const double j_g = g->fisher_info();
    const CvCurve curve = simulate_cv_curve(j_g, alpha, symmetric, grid_step, h_bar_per_sigma, opts);
    const auto n = static_cast<Eigen::Index>(curve.sigma.size());
    Eigen::MatrixXd X(n, 5);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double pw = 1.0;
        for (Eigen::Index j = 0; j < 5; ++j) {
            X(i, j) = pw;
            pw *= curve.sigma[static_cast<std::size_t>(i)];
        }
        y(i) = curve.value[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    CriticalValueModel model;
    model.reference_name = std::string(g->name());
    model.alpha = alpha;
    model.h_bar_per_sigma = h_bar_per_sigma;
    for (int j = 0; j < 5; ++j) model.coefficients[static_cast<std::size_t>(j)] = beta(j);
    model.domain_lo = 0.0;
    model.domain_hi = std::sqrt(j_g);
    model.symmetric = symmetric;
    model.max_abs_residual = (X * beta - y).cwiseAbs().maxCoeff();
    model.source = "refit";
    return model;
}

std::vector<double> power_envelope(double j_f, std::span<const double> h_grid, double alpha, bool symmetric,
                                   const LimitSimOptions& opts) {
    if (!(j_f >= 1.0)) throw ParameterError("power_envelope: J_f must be at least 1");
    check_alpha(alpha);
    check_options(opts, 1);
    const auto bank = NullBank::get(opts);
    const auto draws = bank->draws();
    const double k = std::sqrt(j_f - 1.0);
    std::vector<double> out(h_grid.size());
    std::vector<double> stat(draws.size());
    std::vector<double> log_weight(draws.size());
    for (std::size_t g = 0; g < h_grid.size(); ++g) {
        const double h = h_grid[g];
        if (h == 0.0) {
            out[g] = alpha;
            continue;
        }
        for (std::size_t i = 0; i < draws.size(); ++i) {
            const auto& f = draws[i];
            const double delta_f = f.int_w_dw + k * f.int_w_dw_perp;
            log_weight[i] = h * delta_f - 0.5 * h * h * j_f * f.int_w_sq;
            if (symmetric) {
                stat[i] = log_weight[i];
            } else {
                const double delta = f.int_w_dw + k * f.int_w_db_perp;
                const double info = j_f * f.int_w_sq - f.int_w * f.int_w * (j_f - 1.0);
                stat[i] = h * delta - 0.5 * h * h * info;
            }
        }
        const double c = upper_quantile(stat, alpha);
        out[g] = reweighted_power(stat, log_weight, c);
    }
    return out;
}

namespace {

struct PowerDraw {
    double int_w_dw = 0.0;
    double int_w_sq = 0.0;
    double int_w = 0.0;
    double w_end = 0.0;
    double int_w_dw_phi_f = 0.0;
    double int_w_dw_phi_g = 0.0;
    double w_phi_g_end = 0.0;
};

Eigen::Matrix3d covariance_root(const TruthParams& t, double j_g) {
    Eigen::Matrix3d cov;
    cov << 1.0, 1.0, t.sigma_eps_phi_g,  //
        1.0, t.j_f, t.j_fg,              //
        t.sigma_eps_phi_g, t.j_fg, j_g;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Eigen::Vector3d ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -1e-9 * scale) {
        std::ostringstream os;
        os << "asymptotic_test_power: covariance of (W_eps, W_phi_f, W_phi_g) is not positive semidefinite"
           << " (J_f = " << t.j_f << ", J_fg = " << t.j_fg << ", sigma_eps_phi_g = " << t.sigma_eps_phi_g
           << ", J_g = " << j_g << ", smallest eigenvalue " << ev.minCoeff() << ")";
        throw ParameterError(os.str());
    }
    const Eigen::Vector3d root = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

std::vector<double> asymptotic_test_power(const TruthParams& truth, const LimitTestSpec& test,
                                          std::span<const double> h_grid, double alpha,
                                          const LimitSimOptions& opts) {
    check_alpha(alpha);
    check_options(opts, 1);
    if (!(truth.j_f >= 1.0 - 1e-12)) throw ParameterError("asymptotic_test_power: J_f must be at least 1");
    if (!(truth.sigma_eps_phi_g > 0.0)) {
        throw ParameterError("asymptotic_test_power: sigma_eps_phi_g must be positive");
    }
    const Eigen::Matrix3d root = covariance_root(truth, test.j_g);
    const double step = 1.0 / std::sqrt(static_cast<double>(opts.m));

    std::vector<PowerDraw> draws(opts.n_rep);
    const std::uint64_t stream = stream_key(kPowerStream, opts.m);
    parallel_for(opts.n_rep, opts.workers, [&](std::size_t i) {
        Engine rng = substream(opts.seed, stream, i);
        std::normal_distribution<double> normal;
        PowerDraw d;
        double w = 0.0;
        double wg = 0.0;
        for (std::size_t k = 0; k < opts.m; ++k) {
            const Eigen::Vector3d z(normal(rng), normal(rng), normal(rng));
            const Eigen::Vector3d inc = step * (root * z);
            d.int_w_sq += w * w;
            d.int_w += w;
            d.int_w_dw += w * inc(0);
            d.int_w_dw_phi_f += w * inc(1);
            d.int_w_dw_phi_g += w * inc(2);
            w += inc(0);
            wg += inc(2);
        }
        const double inv_m = 1.0 / static_cast<double>(opts.m);
        d.int_w_sq *= inv_m;
        d.int_w *= inv_m;
        d.w_end = w;
        d.w_phi_g_end = wg;
        draws[i] = d;
    });

    // Division-free form of lambda * Delta_perp: (1/sigma) int W dB_phi_g - int W dB_eps.
    const double s = truth.sigma_eps_phi_g;
    const double excess = std::max(0.0, test.j_g / (s * s) - 1.0);
    const double lam = test.lambda;
    std::vector<double> stat(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& d = draws[i];
        double delta = 0.0;
        double info = 0.0;
        if (test.symmetric) {
            delta = d.int_w_dw + lam * (d.int_w_dw_phi_g / s - d.int_w_dw);
            info = (1.0 + lam * lam * excess) * d.int_w_sq;
        } else {
            const double b_phi_g = d.int_w_dw_phi_g - d.w_phi_g_end * d.int_w;
            const double b_eps = d.int_w_dw - d.w_end * d.int_w;
            delta = d.int_w_dw + lam * (b_phi_g / s - b_eps);
            info = d.int_w_sq + lam * lam * excess * (d.int_w_sq - d.int_w * d.int_w);
        }
        stat[i] = test.h_bar * delta - 0.5 * test.h_bar * test.h_bar * info;
    }
    const double c = upper_quantile(stat, alpha);

    std::vector<double> out(h_grid.size());
    std::vector<double> log_weight(draws.size());
    for (std::size_t g = 0; g < h_grid.size(); ++g) {
        const double h = h_grid[g];
        if (h == 0.0) {
            // The statistic may have atoms; report the exact null rejection frequency.
            std::size_t hits = 0;
            for (double v : stat) hits += v >= c ? 1 : 0;
            out[g] = static_cast<double>(hits) / static_cast<double>(stat.size());
            continue;
        }
        for (std::size_t i = 0; i < draws.size(); ++i) {
            log_weight[i] = h * draws[i].int_w_dw_phi_f - 0.5 * h * h * truth.j_f * draws[i].int_w_sq;
        }
        out[g] = reweighted_power(stat, log_weight, c);
    }
    return out;
}

std::vector<double> ers_asymptotic_power(double j_f, std::span<const double> h_grid, double alpha,
                                         const LimitSimOptions& opts) {
    // The third coordinate is a copy of W_eps; with lambda = 0 it never enters the statistic.
    const TruthParams truth{j_f, 1.0, 1.0};
    const LimitTestSpec ers{1.0, 0.0, -7.0, false};
    return asymptotic_test_power(truth, ers, h_grid, alpha, opts);
}

WeightSummary likelihood_ratio_weight_mean(double j_f, double h, const LimitSimOptions& opts) {
    if (!(j_f >= 1.0)) throw ParameterError("likelihood_ratio_weight_mean: J_f must be at least 1");
    check_options(opts, 2);
    const auto bank = NullBank::get(opts);
    const double k = std::sqrt(j_f - 1.0);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& f : bank->draws()) {
        const double w = std::exp(h * (f.int_w_dw + k * f.int_w_dw_perp) - 0.5 * h * h * j_f * f.int_w_sq);
        sum += w;
        sum_sq += w * w;
    }
    const double n = static_cast<double>(bank->draws().size());
    WeightSummary out;
    out.mean = sum / n;
    const double var = std::max(0.0, (sum_sq / n - out.mean * out.mean) * n / (n - 1.0));
    out.std_error = std::sqrt(var / n);
    return out;
}

}  // namespace hrt
