#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hrt/rng.hpp"

namespace hrt {

/// Default Euler grid and replication counts of the limit experiment.
inline constexpr std::size_t kDefaultGridPoints = 2500;
inline constexpr std::size_t kDefaultCvReps = 20000;
inline constexpr std::size_t kDefaultEnvelopeReps = 40000;

/**
 * @brief Path functionals of one draw of (W_eps, W_perp) on an m-point Euler grid.
 *
 * Integrals are left-point sums: int W^2 = (1/m) sum_{k<m} W_k^2 and
 * int W dX = sum_k W_k (X_{k+1} - X_k). B_perp is the bridge of W_perp.
 */
struct LimitFunctionals {
    double int_w_dw = 0.0;
    double int_w_sq = 0.0;
    double int_w = 0.0;
    double w_end = 0.0;
    double int_w_dw_perp = 0.0;
    double int_w_db_perp = 0.0;
    double w_perp_end = 0.0;
};

/// One full draw with stored increments; W_phi_f = W_eps + sqrt(J_f - 1) W_b.
struct LimitSample {
    std::vector<double> w_eps;   ///< increments, variance 1/m each
    std::vector<double> w_perp;
    std::vector<double> w_b;
    double j_f = 1.0;
    LimitFunctionals core;
    double int_w_dw_b = 0.0;
    double int_w_db_b = 0.0;
    double int_w_dw_phi_f = 0.0;
    double int_w_db_phi_f = 0.0;

    double sq_int_w() const { return core.int_w * core.int_w; }
};

/// Draw three independent standard Brownian paths on m points. Throws ParameterError when m = 0 or j_f < 1.
LimitSample draw_limit_sample(std::size_t m, Engine& rng, double j_f = 1.0);

/// Functionals of the (W_eps, W_perp) pair drawn from @p rng, without storing the paths.
LimitFunctionals draw_limit_functionals(std::size_t m, Engine& rng);

/**
 * @brief Parameters of the limit statistic L = h Delta - h^2 I / 2.
 *
 * Delta = int W dW + lambda sqrt(r - 1) int W dB_perp and
 * I = int W^2 + lambda^2 (r - 1) (int W^2 - (int W)^2) with r = J_g / sigma^2.
 * In the symmetric case W_perp replaces B_perp and I = (1 + lambda^2 (r - 1)) int W^2.
 */
struct LimitStatisticParams {
    double h_bar = -7.0;
    double sigma_eps_phi_g = 1.0;
    double j_g = 1.0;
    double lambda = 1.0;
    bool symmetric = false;
};

/// Throws IllConditionedError unless 0 < sigma_eps_phi_g <= sqrt(j_g).
double ahrt_limit_statistic(const LimitFunctionals& f, const LimitStatisticParams& params);
double ahrt_limit_statistic(const LimitSample& s, double h_bar, double sigma_eps_phi_g, double j_g, double lambda,
                            bool symmetric);

/// Common options for every Monte-Carlo routine of the limit experiment.
struct LimitSimOptions {
    std::size_t n_rep = kDefaultCvReps;
    std::size_t m = kDefaultGridPoints;
    std::uint64_t seed = 0;
    unsigned workers = 0;  ///< 0 = hardware concurrency
};

/**
 * @brief Cached set of null draws shared by all quantile and power computations.
 *
 * Keyed by (n_rep, m, seed); the content does not depend on the worker count.
 */
class NullBank {
public:
    static std::shared_ptr<const NullBank> get(const LimitSimOptions& opts);

    std::span<const LimitFunctionals> draws() const { return draws_; }
    std::size_t grid_points() const { return m_; }

    explicit NullBank(std::vector<LimitFunctionals> draws, std::size_t m) : draws_(std::move(draws)), m_(m) {}

private:
    std::vector<LimitFunctionals> draws_;
    std::size_t m_;
};

/// (1 - alpha) sample quantile with linear interpolation between order statistics.
double upper_quantile(std::vector<double> values, double alpha);

/**
 * @brief Simulated (1 - alpha) quantile of the null limit statistic.
 *
 * Throws ParameterError when n_rep < 1000 or alpha is outside (0, 1).
 */
double critical_value(const LimitStatisticParams& params, double alpha, const LimitSimOptions& opts);

/**
 * @brief Degree-4 critical-value function c(sigma) for h_bar = h_bar_per_sigma * sigma.
 */
struct CriticalValueModel {
    std::string reference_name;
    double alpha = 0.05;
    double h_bar_per_sigma = -7.0;
    std::array<double, 5> coefficients{};
    double domain_lo = 0.0;
    double domain_hi = 1.0;
    bool symmetric = false;
    double max_abs_residual = 0.0;  ///< largest |fit - simulated| on the fitting grid, 0 if unknown
    std::string source;             ///< "refit" or "paper_table1"

    /// Throws DomainError outside [domain_lo, domain_hi].
    double evaluate(double sigma) const;
};

/// Text record: one "key value..." line per field, coefficients to 6 decimals.
std::string format_model(const CriticalValueModel& model);
CriticalValueModel parse_model(std::string_view text);

struct CvCurve {
    std::vector<double> sigma;
    std::vector<double> value;
};

/// Simulated critical values on the grid step, 2 step, ... with sqrt(J_g) appended.
CvCurve simulate_cv_curve(double j_g, double alpha, bool symmetric, double grid_step, double h_bar_per_sigma,
                          const LimitSimOptions& opts);

/**
 * @brief OLS fit of a degree-4 polynomial to simulate_cv_curve().
 *
 * Throws ParameterError for a non-positive step or when the grid has fewer
 * than five points.
 */
CriticalValueModel fit_cv_polynomial(std::string_view g_name, double alpha, bool symmetric, double grid_step,
                                     const LimitSimOptions& opts, double h_bar_per_sigma = -7.0);

/// Built-in model (source "refit") for gaussian, laplace or t3 at alpha = 0.05.
const CriticalValueModel& default_cv_model(std::string_view g_name, bool symmetric);

/// Published polynomial (rank case only) for gaussian, laplace or t3.
const CriticalValueModel& paper_table1_model(std::string_view g_name);

/**
 * @brief Semiparametric power envelope over @p h_grid.
 *
 * At each h the point-optimal statistic is computed on the null bank and the
 * power is the self-normalized reweighted null rejection frequency. h = 0 returns alpha.
 * Throws ParameterError when j_f < 1.
 */
std::vector<double> power_envelope(double j_f, std::span<const double> h_grid, double alpha, bool symmetric,
                                   const LimitSimOptions& opts);

/// Population parameters of the true density f relative to the reference g.
struct TruthParams {
    double j_f = 1.0;
    double j_fg = 1.0;
    double sigma_eps_phi_g = 1.0;
};

/// Test whose asymptotic power is computed; lambda = 0 with j_g = 1 gives the ERS functional.
struct LimitTestSpec {
    double j_g = 1.0;
    double lambda = 1.0;
    double h_bar = -7.0;
    bool symmetric = false;
};

/**
 * @brief Asymptotic power curve of the limit test under true-density parameters.
 *
 * Throws ParameterError when the covariance of (W_eps, W_phi_f, W_phi_g)(1)
 * is not positive semidefinite.
 */
std::vector<double> asymptotic_test_power(const TruthParams& truth, const LimitTestSpec& test,
                                          std::span<const double> h_grid, double alpha,
                                          const LimitSimOptions& opts);

/// Asymptotic power of the ERS point-optimal test (h_bar = -7) under J_f.
std::vector<double> ers_asymptotic_power(double j_f, std::span<const double> h_grid, double alpha,
                                         const LimitSimOptions& opts);

struct WeightSummary {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Mean of exp(h Delta_f - h^2 J_f int W^2 / 2) over the null bank.
WeightSummary likelihood_ratio_weight_mean(double j_f, double h, const LimitSimOptions& opts);

}  // namespace hrt
