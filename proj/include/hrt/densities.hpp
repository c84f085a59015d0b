#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hrt {

/**
 * @brief A reference density g driving the rank scores.
 *
 * Exposes the location score phi_g = -g'/g, the quantile G^{-1}, the cdf and
 * the pdf together with the standard deviation sigma_g and the standardized
 * Fisher information J_g = sigma_g^2 * E[phi_g^2]. All quantities refer to the
 * same internal scale; every statistic built from them is scale invariant.
 *
 * Instances are immutable after construction and may be shared across threads.
 */
class ReferenceDensity {
public:
    virtual ~ReferenceDensity() = default;

    virtual std::string_view name() const = 0;
    virtual double sigma() const = 0;
    virtual double fisher_info() const = 0;
    virtual double score(double x) const = 0;
    /// G^{-1}(u); throws DomainError unless 0 < u < 1.
    virtual double quantile(double u) const = 0;
    virtual double cdf(double x) const = 0;
    virtual double pdf(double x) const = 0;
    /// True when g is symmetric about zero (required by the signed-rank tests).
    virtual bool symmetric() const = 0;
};

using DensityPtr = std::shared_ptr<const ReferenceDensity>;

/// Standard normal: sigma_g = 1, J_g = 1, phi(x) = x.
class GaussianDensity final : public ReferenceDensity {
public:
    std::string_view name() const override { return "gaussian"; }
    double sigma() const override { return 1.0; }
    double fisher_info() const override { return 1.0; }
    double score(double x) const override { return x; }
    double quantile(double u) const override;
    double cdf(double x) const override;
    double pdf(double x) const override;
    bool symmetric() const override { return true; }
};

/// Laplace with unit scale b = 1: sigma_g = sqrt(2), J_g = 2, phi(x) = sign(x).
class LaplaceDensity final : public ReferenceDensity {
public:
    std::string_view name() const override { return "laplace"; }
    double sigma() const override;
    double fisher_info() const override { return 2.0; }
    double score(double x) const override;
    double quantile(double u) const override;
    double cdf(double x) const override;
    double pdf(double x) const override;
    bool symmetric() const override { return true; }
};

/// Student t with 3 degrees of freedom: sigma_g = sqrt(3), J_g = 2, phi(x) = 4x/(3+x^2).
class StudentT3Density final : public ReferenceDensity {
public:
    std::string_view name() const override { return "t3"; }
    double sigma() const override;
    double fisher_info() const override { return 2.0; }
    double score(double x) const override;
    double quantile(double u) const override;
    double cdf(double x) const override;
    double pdf(double x) const override;
    bool symmetric() const override { return true; }
};

/**
 * @brief Gaussian-kernel density estimate used as a data-driven reference density.
 *
 * f(x) = (n h)^{-1} sum_t K((x - e_t)/h). The cdf is the matching mixture of
 * normal cdfs and the quantile inverts it by bisection followed by Newton
 * polishing (tolerance 1e-10). Kernel contributions farther than 9 bandwidths
 * from x are dropped; they are below double precision.
 */
class KernelDensityEstimate final : public ReferenceDensity {
public:
    KernelDensityEstimate(std::vector<double> sample, double bandwidth);

    std::string_view name() const override { return "estimated"; }
    double sigma() const override { return sigma_; }
    double fisher_info() const override { return fisher_info_; }
    double score(double x) const override;
    double quantile(double u) const override;
    double cdf(double x) const override;
    double pdf(double x) const override;
    bool symmetric() const override { return false; }

    double bandwidth() const { return bandwidth_; }
    std::span<const double> sample() const { return sample_; }
    double mean() const { return mean_; }

    /// Quantiles at increasing probabilities, warm-starting each inversion from the previous root.
    std::vector<double> quantiles_sorted(std::span<const double> increasing_u) const;

    /// Integral of the density over its effective support (should be 1).
    double total_mass() const;

private:
    struct Moments {
        double pdf = 0.0;
        double dpdf = 0.0;
    };
    Moments moments(double x) const;
    double newton_polish(double u, double lo, double hi, double x0) const;

    std::vector<double> sample_;  // sorted
    double bandwidth_;
    double mean_ = 0.0;
    double sigma_ = 0.0;
    double fisher_info_ = 0.0;
};

/// Built-in density by name: "gaussian", "laplace" or "t3". Throws ParameterError otherwise.
DensityPtr make_reference(std::string_view name);

/// Names accepted by make_reference plus "estimated".
std::vector<std::string> reference_names();

/// Rule-of-thumb bandwidth (4 / (3 n))^(1/5) * sigma_hat.
double kde_bandwidth(std::size_t n, double sigma_hat);

/**
 * @brief Fit the kernel reference density to residuals.
 *
 * Bandwidth follows kde_bandwidth(residuals.size(), sigma_hat).
 * Throws DegenerateSampleError when all residuals coincide and
 * ParameterError when the input is empty or sigma_hat <= 0.
 */
std::shared_ptr<const KernelDensityEstimate> fit_kernel_density(std::span<const double> residuals,
                                                                double sigma_hat);

/// sigma_g * phi_g(G^{-1}(i / n)); throws DomainError unless 0 < i/n < 1.
double score_at_rank_quantile(const ReferenceDensity& g, long i, long n);

/**
 * @brief Rank-score table a_i = sigma_g * phi_g(G^{-1}(i / denom)), i = 1..n.
 *
 * With signed = true the argument is 1/2 + i / (2 denom) instead, which gives
 * the scores attached to the ranks of absolute values. Tables for the built-in
 * densities are memoized by (name, n, denom, signed).
 */
std::shared_ptr<const std::vector<double>> rank_scores(const ReferenceDensity& g, long n, long denom,
                                                       bool signed_scores);

struct CrossMoments {
    double sigma_eps_phi_g = 0.0;  ///< sigma_f^{-1} sigma_g int F^{-1}(u) phi_g(G^{-1}(u)) du
    double j_fg = 0.0;             ///< sigma_f sigma_g int phi_f(F^{-1}(u)) phi_g(G^{-1}(u)) du
};

/**
 * @brief Population cross moments between a true density f and a reference density g.
 *
 * Tanh-sinh quadrature on (1e-10, 1 - 1e-10) in the probability
 * scale, split at 1/2 where the Laplace score jumps. Throws NumericalError if
 * the error estimate exceeds 1e-7.
 */
CrossMoments cross_moments(const ReferenceDensity& f, const ReferenceDensity& g);

/// J_fg by the substitution x = F^{-1}(u): sigma_f sigma_g int phi_f(x) phi_g(G^{-1}(F(x))) f(x) dx.
double cross_information_x_space(const ReferenceDensity& f, const ReferenceDensity& g);

/// sigma_g^2 * int_0^1 phi_g(G^{-1}(u))^2 du by quadrature.
double fisher_info_by_quadrature(const ReferenceDensity& g);

}  // namespace hrt
