#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hrt/densities.hpp"
#include "hrt/error.hpp"

namespace hrt {

namespace {

constexpr double kWindow = 9.0;  // kernel cut-off in bandwidths
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double kde_bandwidth(std::size_t n, double sigma_hat) {
    if (n == 0) throw ParameterError("kde_bandwidth: sample size must be positive");
    return std::pow(4.0 / (3.0 * static_cast<double>(n)), 0.2) * sigma_hat;
}

std::shared_ptr<const KernelDensityEstimate> fit_kernel_density(std::span<const double> residuals,
                                                                double sigma_hat) {
    if (residuals.empty()) throw ParameterError("fit_kernel_density: empty residual vector");
    if (!(sigma_hat > 0.0) || !std::isfinite(sigma_hat)) {
        throw ParameterError("fit_kernel_density: sigma_hat must be positive and finite");
    }
    return std::make_shared<KernelDensityEstimate>(
        std::vector<double>(residuals.begin(), residuals.end()), kde_bandwidth(residuals.size(), sigma_hat));
}

KernelDensityEstimate::KernelDensityEstimate(std::vector<double> sample, double bandwidth)
    : sample_(std::move(sample)), bandwidth_(bandwidth) {
    if (sample_.empty()) throw ParameterError("KernelDensityEstimate: empty sample");
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
        throw ParameterError("KernelDensityEstimate: bandwidth must be positive and finite");
    }
    std::sort(sample_.begin(), sample_.end());
    if (sample_.front() == sample_.back()) {
        throw DegenerateSampleError("KernelDensityEstimate: all residuals are identical");
    }
    const double n = static_cast<double>(sample_.size());
    mean_ = std::accumulate(sample_.begin(), sample_.end(), 0.0) / n;
    double ss = 0.0;
    for (double e : sample_) ss += (e - mean_) * (e - mean_);
    sigma_ = std::sqrt(ss / n + bandwidth_ * bandwidth_);

    // J = sigma^2 * int f'^2 / f over the effective support, one panel per bandwidth.
    using boost::math::quadrature::gauss_kronrod;
    const double lo = sample_.front() - kWindow * bandwidth_;
    const double hi = sample_.back() + kWindow * bandwidth_;
    const auto panels = static_cast<long>(std::ceil((hi - lo) / bandwidth_));
    const double width = (hi - lo) / static_cast<double>(panels);
    auto integrand = [this](double x) {
        const Moments m = moments(x);
        return m.pdf > 0.0 ? m.dpdf * m.dpdf / m.pdf : 0.0;
    };
    double info = 0.0;
    for (long k = 0; k < panels; ++k) {
        const double a = lo + width * static_cast<double>(k);
        info += gauss_kronrod<double, 21>::integrate(integrand, a, a + width, 0, 0.0);
    }
    fisher_info_ = sigma_ * sigma_ * info;
}

KernelDensityEstimate::Moments KernelDensityEstimate::moments(double x) const {
    const auto first = std::lower_bound(sample_.begin(), sample_.end(), x - kWindow * bandwidth_);
    const auto last = std::upper_bound(first, sample_.end(), x + kWindow * bandwidth_);
    Moments m;
    for (auto it = first; it != last; ++it) {
        const double z = (x - *it) / bandwidth_;
        const double k = std::exp(-0.5 * z * z);
        m.pdf += k;
        m.dpdf -= z * k;
    }
    const double scale = kInvSqrt2Pi / (static_cast<double>(sample_.size()) * bandwidth_);
    m.pdf *= scale;
    m.dpdf *= scale / bandwidth_;
    return m;
}

double KernelDensityEstimate::pdf(double x) const { return moments(x).pdf; }

double KernelDensityEstimate::score(double x) const {
    const Moments m = moments(x);
    if (m.pdf > 1e-300) return -m.dpdf / m.pdf;
    // Far outside the sample the mixture is dominated by the nearest point.
    const double nearest = x < sample_.front() ? sample_.front() : sample_.back();
    return (x - nearest) / (bandwidth_ * bandwidth_);
}

double KernelDensityEstimate::cdf(double x) const {
    const auto first = std::lower_bound(sample_.begin(), sample_.end(), x - kWindow * bandwidth_);
    const auto last = std::upper_bound(first, sample_.end(), x + kWindow * bandwidth_);
    double total = static_cast<double>(first - sample_.begin());
    for (auto it = first; it != last; ++it) total += normal_cdf((x - *it) / bandwidth_);
    return total / static_cast<double>(sample_.size());
}

double KernelDensityEstimate::newton_polish(double u, double lo, double hi, double x0) const {
    // Bracketed Newton: falls back to bisection whenever a step leaves [lo, hi].
    double x = x0;
    for (int iter = 0; iter < 200; ++iter) {
        const double diff = cdf(x) - u;
        if (diff > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double dens = pdf(x);
        double next = dens > 0.0 ? x - diff / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-10 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-12) return next;
        x = next;
    }
    throw NumericalError("KernelDensityEstimate: quantile inversion did not converge");
}

double KernelDensityEstimate::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) {
        std::ostringstream os;
        os << "estimated quantile: probability " << u << " is outside (0, 1)";
        throw DomainError(os.str());
    }
    const double span = sample_.back() - sample_.front() + bandwidth_;
    double lo = sample_.front() - kWindow * bandwidth_;
    double hi = sample_.back() + kWindow * bandwidth_;
    while (cdf(lo) > u) lo -= span;
    while (cdf(hi) < u) hi += span;
    // Coarse bisection, then Newton.
    for (int iter = 0; iter < 40 && hi - lo > 1e-3 * bandwidth_; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < u ? lo : hi) = mid;
    }
    return newton_polish(u, lo, hi, 0.5 * (lo + hi));
}

std::vector<double> KernelDensityEstimate::quantiles_sorted(std::span<const double> increasing_u) const {
    std::vector<double> out;
    out.reserve(increasing_u.size());
    double lower = sample_.front() - kWindow * bandwidth_;
    for (double u : increasing_u) {
        if (!out.empty() && u < 1.0 && u > 0.0) {
            // Bracket upward from the previous root.
            double hi = std::max(out.back(), lower) + bandwidth_;
            while (cdf(hi) < u) hi += bandwidth_;
            const double lo = out.back();
            out.push_back(newton_polish(u, lo, hi, lo));
            lower = out.back();
        } else {
            out.push_back(quantile(u));
            lower = out.back();
        }
    }
    return out;
}

double KernelDensityEstimate::total_mass() const {
    using boost::math::quadrature::gauss_kronrod;
    const double lo = sample_.front() - 12.0 * bandwidth_;
    const double hi = sample_.back() + 12.0 * bandwidth_;
    const auto panels = static_cast<long>(std::ceil((hi - lo) / bandwidth_));
    const double width = (hi - lo) / static_cast<double>(panels);
    double mass = 0.0;
    for (long k = 0; k < panels; ++k) {
        const double a = lo + width * static_cast<double>(k);
        mass += gauss_kronrod<double, 21>::integrate([this](double x) { return pdf(x); }, a, a + width, 0,
                                                     0.0);
    }
    return mass;
}

}  // namespace hrt
