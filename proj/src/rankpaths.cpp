#include "hrt/rankpaths.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hrt/error.hpp"

namespace hrt {

namespace {

std::vector<long> stable_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<long> ranks(x.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = static_cast<long>(r + 1);
    return ranks;
}

void require_same_grid(const StepPath& x, const StepPath& y) {
    if (x.grid_size() != y.grid_size()) {
        std::ostringstream os;
        os << "stochastic_integral: paths live on different grids (" << x.grid_size() << " vs "
           << y.grid_size() << " jumps)";
        throw ParameterError(os.str());
    }
}

}  // namespace

RankData compute_ranks(std::span<const double> residuals) {
    RankData out;
    out.n = residuals.size();
    out.ranks = stable_ranks(residuals);
    out.signs.resize(residuals.size());
    std::vector<double> magnitude(residuals.size());
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        out.signs[i] = residuals[i] < 0.0 ? -1 : 1;
        magnitude[i] = std::abs(residuals[i]);
    }
    out.abs_ranks = stable_ranks(magnitude);
    return out;
}

double StepPath::end_value() const { return std::accumulate(jumps.begin(), jumps.end(), 0.0); }

std::vector<double> StepPath::values() const {
    std::vector<double> v(jumps.size() + 1, 0.0);
    std::partial_sum(jumps.begin(), jumps.end(), v.begin() + 1);
    return v;
}

double stochastic_integral(const StepPath& x, const StepPath& y) {
    require_same_grid(x, y);
    double level = 0.0;
    double sum = 0.0;
    for (std::size_t t = 0; t < x.jumps.size(); ++t) {
        sum += level * y.jumps[t];
        level += x.jumps[t];
    }
    return sum;
}

double integral_ds(const StepPath& x) {
    if (x.jumps.empty()) return 0.0;
    double level = 0.0;
    double sum = 0.0;
    for (double j : x.jumps) {
        sum += level;
        level += j;
    }
    return sum / static_cast<double>(x.jumps.size());
}

double integral_sq_ds(const StepPath& x) {
    if (x.jumps.empty()) return 0.0;
    double level = 0.0;
    double sum = 0.0;
    for (double j : x.jumps) {
        sum += level * level;
        level += j;
    }
    return sum / static_cast<double>(x.jumps.size());
}

PartialSumPaths build_paths(std::span<const double> residuals, const ReferenceDensity& g, std::size_t t_total,
                            int p, std::optional<double> level_shift) {
    const std::size_t n = residuals.size();
    if (p < 0 || t_total < static_cast<std::size_t>(p) + 3 || n != t_total - static_cast<std::size_t>(p) - 1) {
        std::ostringstream os;
        os << "build_paths: expected T - p - 1 residuals (T = " << t_total << ", p = " << p << ", got " << n << ")";
        throw ParameterError(os.str());
    }
    const double T = static_cast<double>(t_total);
    const double root_t = std::sqrt(T);

    const double shift =
        level_shift.value_or(std::accumulate(residuals.begin(), residuals.end(), 0.0) / T);
    double ss = 0.0;
    for (double e : residuals) ss += (e - shift) * (e - shift);
    const double sigma_f = std::sqrt(ss / static_cast<double>(n));
    if (!(sigma_f > 0.0) || !std::isfinite(sigma_f)) {
        throw DegenerateSampleError("build_paths: residual scale estimate is zero or not finite");
    }

    PartialSumPaths out;
    out.sigma_f_hat = sigma_f;
    out.t_total = t_total;
    out.p = p;
    out.ranks = compute_ranks(residuals);

    const long nl = static_cast<long>(n);
    const auto scores = rank_scores(g, nl, nl + 1, false);
    const auto signed_scores = rank_scores(g, nl, nl + 1, true);
    const double centre = std::accumulate(scores->begin(), scores->end(), 0.0) / T;

    out.w_eps.jumps.assign(t_total, 0.0);
    out.b_phi_g.jumps.assign(t_total, 0.0);
    out.w_phi_g.jumps.assign(t_total, 0.0);
    const std::size_t offset = static_cast<std::size_t>(p) + 1;  // jump index of t = p + 2
    double cross = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double a = (*scores)[static_cast<std::size_t>(out.ranks.ranks[j] - 1)];
        const double b = (*signed_scores)[static_cast<std::size_t>(out.ranks.abs_ranks[j] - 1)];
        const double z = residuals[j] / sigma_f;
        out.w_eps.jumps[offset + j] = z / root_t;
        out.b_phi_g.jumps[offset + j] = (a - centre) / root_t;
        out.w_phi_g.jumps[offset + j] = out.ranks.signs[j] * b / root_t;
        cross += z * a;
    }
    out.sigma_eps_phi_g_hat = cross / static_cast<double>(n);
    return out;
}

PartialSumPaths build_paths(const ArFit& fit, const ReferenceDensity& g) {
    if (fit.include_level) throw ParameterError("build_paths: expects an aligned (difference) AR fit");
    const std::size_t T = fit.t_total;
    const auto p = static_cast<std::size_t>(fit.p);
    double sum = 0.0;
    for (std::size_t k = p; k < fit.differences.size(); ++k) sum += fit.differences[k];
    const double mean = sum / static_cast<double>(T);
    const double gamma_sum = std::accumulate(fit.gamma_hat.begin(), fit.gamma_hat.end(), 0.0);
    return build_paths(fit.residuals, g, T, fit.p, mean * (1.0 - gamma_sum));
}

double clamp_sigma(double sigma_eps_phi_g, double j_g) {
    const double upper = std::sqrt(j_g) - kSigmaMargin;
    return std::clamp(sigma_eps_phi_g, kSigmaMargin, std::max(kSigmaMargin, upper));
}

OrthogonalPaths orthogonalize(const PartialSumPaths& paths, double j_g, std::optional<double> sigma) {
    const double s = sigma.value_or(paths.sigma_eps_phi_g_hat);
    const double upper = std::sqrt(j_g) - kSigmaMargin;
    // Small slack so that values produced by clamp_sigma() are accepted.
    if (!(s >= kSigmaMargin * (1.0 - 1e-12)) || !(s <= upper * (1.0 + 1e-12))) {
        std::ostringstream os;
        os << "orthogonalize: sigma_eps_phi_g = " << s << " outside [" << kSigmaMargin << ", " << upper
           << "] (J_g = " << j_g << "); clamp it or use the lambda = 1 closed form";
        throw IllConditionedError(os.str());
    }
    OrthogonalPaths out;
    out.sigma_used = s;
    out.prefactor = 1.0 / std::sqrt(j_g / (s * s) - 1.0);
    const std::size_t T = paths.w_eps.grid_size();
    const double drift = paths.w_eps.end_value() / static_cast<double>(T);
    out.b_perp.jumps.resize(T);
    out.w_perp.jumps.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double w = paths.w_eps.jumps[t];
        out.b_perp.jumps[t] = out.prefactor * (paths.b_phi_g.jumps[t] / s - (w - drift));
        out.w_perp.jumps[t] = out.prefactor * (paths.w_phi_g.jumps[t] / s - w);
    }
    return out;
}

}  // namespace hrt
