#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hrt {

/// Observations Y_1..Y_T.
class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Delta Y_t for t = 2..T (length T - 1).
    std::vector<double> differences() const;

private:
    std::vector<double> values_;
};

/**
 * @brief Least-squares AR(p) fit used for prewhitening and by the competitor tests.
 *
 * In the aligned case (include_level = false) the regression is
 *   Delta Y_t = c + sum_i Gamma_i Delta Y_{t-i} + e_t,   t = p+2..T,
 * and @c residuals holds Gamma_hat(L) Delta Y_t (the intercept is not removed,
 * so that the partial sums keep their level). With include_level = true the
 * regression is Y_t = mu + rho Y_{t-1} + sum_i Gamma_i Delta Y_{t-i} + e_t and
 * @c residuals are the plain OLS residuals.
 */
struct ArFit {
    int p = 0;
    bool include_level = false;
    bool discretized = false;
    std::vector<double> gamma_hat;
    double intercept = 0.0;
    double rho_hat = 1.0;                ///< only meaningful when include_level
    std::vector<double> residuals;       ///< length T - p - 1, t = p+2..T
    std::vector<double> ols_residuals;   ///< regression residuals (intercept removed)
    std::vector<double> differences;     ///< Delta Y_t, t = 2..T, kept to recompute residuals
    std::size_t t_total = 0;
};

/// Fit the AR(p) regression; throws ParameterError if T < p + 3, RankDeficiencyError on a singular design.
ArFit fit_ar(const TimeSeries& y, int p, bool include_level);

/**
 * @brief Snap Gamma_hat to the grid {k / sqrt(T)} and recompute the aligned residuals.
 *
 * Halfway cases go toward zero. Only valid for aligned fits that are not yet discretized.
 */
ArFit discretize(const ArFit& fit, std::size_t t_total);

/// Nearest multiple of step, halfway cases rounded toward zero.
double snap_to_grid(double value, double step);

/// Gamma(L) x_t = x_t - sum_i gamma_i x_{t-i} for t = p..n-1 (output length n - p).
std::vector<double> apply_lag_polynomial(std::span<const double> x, std::span<const double> gamma);

}  // namespace hrt
