#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hrt/densities.hpp"
#include "hrt/prewhiten.hpp"

namespace hrt {

/// Ranks, signs and ranks of absolute values of a residual vector (1-based ranks).
struct RankData {
    std::size_t n = 0;
    std::vector<long> ranks;
    std::vector<int> signs;
    std::vector<long> abs_ranks;
};

/// Ties are broken by original index; zero gets sign +1.
RankData compute_ranks(std::span<const double> residuals);

/**
 * @brief Step function on [0, 1] with jumps at s = t / T, t = 1..T.
 *
 * jumps[t - 1] is the jump at t / T; the path is right-continuous and starts
 * at zero. A continuous drift s * c is represented by a jump c / T at every
 * grid point, which keeps every left-point integral exact.
 */
struct StepPath {
    std::vector<double> jumps;

    std::size_t grid_size() const { return jumps.size(); }
    double end_value() const;
    /// Values x(t / T) for t = 0..T.
    std::vector<double> values() const;
};

/// Left-point Riemann-Stieltjes sum sum_t x((t/T)-) * (y(t/T) - y((t-1)/T)).
double stochastic_integral(const StepPath& x, const StepPath& y);

/// int_0^1 x(s-) ds.
double integral_ds(const StepPath& x);

/// int_0^1 x(s-)^2 ds.
double integral_sq_ds(const StepPath& x);

struct PartialSumPaths {
    StepPath w_eps;     ///< jumps e_t / (sigma_f_hat sqrt(T))
    StepPath b_phi_g;   ///< centred rank-score partial sums
    StepPath w_phi_g;   ///< signed-rank-score partial sums
    double sigma_f_hat = 0.0;
    double sigma_eps_phi_g_hat = 0.0;
    std::size_t t_total = 0;
    int p = 0;
    RankData ranks;
};

/**
 * @brief Build the rank-based partial-sum processes from aligned residuals.
 *
 * residuals[j] belongs to t = p + 2 + j. sigma_f_hat^2 is the variance of the
 * residuals after subtracting @p level_shift (divisor T - p - 1); the fit
 * overload passes the shift mean(Delta Y) * Gamma_hat(1) with the mean taken
 * over t = p+2..T and divided by T. Without an explicit shift the residual sum
 * divided by T is used, which is the same thing for p = 0.
 *
 * Throws ParameterError when residuals.size() != T - p - 1 and
 * DegenerateSampleError when sigma_f_hat is zero.
 */
PartialSumPaths build_paths(std::span<const double> residuals, const ReferenceDensity& g, std::size_t t_total,
                            int p, std::optional<double> level_shift = std::nullopt);

PartialSumPaths build_paths(const ArFit& fit, const ReferenceDensity& g);

/// Lower and upper clamp margins for sigma_eps_phi_g.
inline constexpr double kSigmaMargin = 0.01;

/// Clamp sigma_eps_phi_g into [0.01, sqrt(J_g) - 0.01].
double clamp_sigma(double sigma_eps_phi_g, double j_g);

struct OrthogonalPaths {
    StepPath b_perp;
    StepPath w_perp;
    double sigma_used = 0.0;
    double prefactor = 0.0;  ///< (J_g / sigma^2 - 1)^(-1/2)
};

/**
 * @brief Remove the W_eps component from the rank-score processes.
 *
 * Uses @p sigma when given, otherwise the estimate stored in @p paths. Throws
 * IllConditionedError when sigma lies outside [0.01, sqrt(J_g) - 0.01]; clamp
 * with clamp_sigma() first.
 */
OrthogonalPaths orthogonalize(const PartialSumPaths& paths, double j_g, std::optional<double> sigma = std::nullopt);

}  // namespace hrt
