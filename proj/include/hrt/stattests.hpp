#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrt/densities.hpp"
#include "hrt/limitsim.hpp"
#include "hrt/prewhiten.hpp"

namespace hrt {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Estimated nuisance quantities reported with a test decision (NaN when not applicable).
struct Nuisance {
    double sigma_f_hat = kNaN;
    double sigma_eps_phi_g_hat = kNaN;  ///< raw estimate
    double sigma_used = kNaN;           ///< after clamping
    double j_g = kNaN;
    double j_fg_hat = kNaN;
    double lambda_hat = kNaN;
    double omega_sq_hat = kNaN;         ///< long-run variance (ERS)
    double rho_hat = kNaN;              ///< levels regression (DF-rho)
};

struct TestResult {
    std::string test_name;
    std::string reference;   ///< reference density, empty for the competitors
    double statistic = kNaN;
    double critical_value = kNaN;
    bool reject = false;
    bool reject_when_large = true;  ///< false for DF-rho and ERS
    double h_bar = kNaN;
    double alpha = 0.05;
    Nuisance nuisance;
    double delta_hat = kNaN;
    double info_hat = kNaN;
    std::string cv_source;  ///< "polynomial:<source>", "simulated" or "tabulated"
    std::vector<std::string> notices;
};

/// h_bar = multiplier * sigma_eps_phi_g (default -7) or a fixed negative value.
struct HBarRule {
    bool scaled = true;
    double value = -7.0;

    static HBarRule times_sigma(double multiplier = -7.0) { return {true, multiplier}; }
    static HBarRule fixed(double h_bar) { return {false, h_bar}; }
    double resolve(double sigma_eps_phi_g) const { return scaled ? value * sigma_eps_phi_g : value; }
};

enum class CvMode { polynomial, simulate };

struct RankTestOptions {
    int p = 0;
    double alpha = 0.05;
    HBarRule h_bar;
    CvMode cv_mode = CvMode::polynomial;
    /// Replications, grid and seed for simulated critical values.
    LimitSimOptions sim{kDefaultCvReps, kDefaultGridPoints, 0, 0};
    /// Snap Gamma_hat to the 1/sqrt(T) grid before computing residuals.
    bool theory_mode = false;
    /// Overrides the built-in polynomial for the polynomial mode.
    std::optional<CriticalValueModel> model;
};

/// Reference density by name; "estimated" is not a fixed density and is resolved per series.
struct ReferenceChoice {
    std::string name = "gaussian";

    bool estimated() const { return name == "estimated"; }
};

/**
 * @brief Approximate hybrid rank test with ranks of the prewhitened differences.
 *
 * sigma_eps_phi_g is clamped to [0.01, sqrt(J_g) - 0.01] (a notice is added when it
 * binds). The polynomial critical value is used for built-in references at
 * alpha = 0.05 and h_bar = -7 sigma; every other configuration is simulated.
 */
TestResult ahrt(const TimeSeries& y, const ReferenceChoice& g, const RankTestOptions& opts);

/// Signed-rank variant; throws ParameterError for a reference density that is not symmetric.
TestResult ahrt_signed(const TimeSeries& y, const ReferenceChoice& g, const RankTestOptions& opts);

/**
 * @brief Hybrid rank test with estimated lambda.
 *
 * Uses jfg_hat when given and jfg_plugin() otherwise. Throws
 * IllConditionedError when sigma_eps_phi_g is too close to 0 or sqrt(J_g).
 * The critical value is always simulated.
 */
TestResult hrt(const TimeSeries& y, const ReferenceChoice& g, const RankTestOptions& opts,
               std::optional<double> jfg_hat = std::nullopt, bool symmetric = false);

/// lambda_hat = (J_fg sigma - sigma^2) / (J_g - sigma^2).
double lambda_hat(double j_fg, double sigma_eps_phi_g, double j_g);

/**
 * @brief Plug-in estimate of J_fg from a kernel estimate of f.
 *
 * (1/n) sum_t sigma_f phi_fhat(e_t) sigma_g phi_g(G^{-1}(R_t / (n + 1))),
 * clipped to +-10 sqrt(J_fhat J_g). Throws DegenerateSampleError for constant residuals.
 */
double jfg_plugin(std::span<const double> residuals, const ReferenceDensity& g);

struct CompetitorOptions {
    int p = 0;
    double alpha = 0.05;
    double h_bar = -7.0;  ///< ERS only
    /// Used when no tabulated critical value applies.
    std::size_t cv_reps = kDefaultCvReps;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    /// Ignore the tabulated values and always simulate.
    bool force_simulation = false;
};

/// Dickey-Fuller T(rho_hat - 1) from the levels regression; rejects for small values.
TestResult df_rho(const TimeSeries& y, const CompetitorOptions& opts);

/// ERS point-optimal statistic [S(a) - a S(1)] / omega^2 with a = 1 + h_bar / T; rejects for small values.
TestResult ers_test(const TimeSeries& y, const CompetitorOptions& opts);

/// Statistic only (no critical value), shared by the tests and the critical-value simulation.
double df_rho_statistic(const TimeSeries& y, int p);
double ers_statistic(const TimeSeries& y, int p, double h_bar);

/// Tabulated 5% cutoffs at T = 100 and T = 2500, if applicable.
std::optional<double> tabulated_df_rho_cv(std::size_t t_len, double alpha);
std::optional<double> tabulated_ers_cv(std::size_t t_len, double alpha, double h_bar);

/**
 * @brief Simulated alpha quantile of a competitor statistic under a Gaussian random walk.
 *
 * test is "df-rho" or "ers". Results are memoized by all arguments except the worker count.
 */
double simulate_competitor_cv(const std::string& test, std::size_t t_len, int p, double alpha, double h_bar,
                              std::size_t n_rep, std::uint64_t seed, unsigned workers = 0);

}  // namespace hrt
