#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hrt/prewhiten.hpp"
#include "hrt/rng.hpp"
#include "hrt/stattests.hpp"

namespace hrt {

/**
 * @brief Innovation law of the data-generating process.
 *
 * Laws with a finite variance are scaled to unit variance and all laws with a
 * finite mean are centred. t2 and t1 (Cauchy) are left unscaled.
 */
class InnovationLaw {
public:
    virtual ~InnovationLaw() = default;
    virtual std::string_view name() const = 0;
    virtual double draw(Engine& rng) const = 0;
    /// False for laws outside the maintained density class (t2, t1, skew-t4).
    virtual bool in_family() const = 0;
};

using InnovationPtr = std::shared_ptr<const InnovationLaw>;

/// gaussian, laplace, t3, t2, t1, t4, skewnormal, skew-t4.
InnovationPtr make_innovation(std::string_view name);
std::vector<std::string> innovation_names();

/// Skewness of the standardized skew-normal law with parameter delta in (-1, 1).
double skew_normal_skewness(double delta);
/// Skewness of the Azzalini skew-t law with 4 degrees of freedom and parameter delta.
double skew_t4_skewness(double delta);
/// delta in (0, 1) that attains the requested skewness; throws ParameterError when unattainable.
double skew_normal_delta(double skewness);
double skew_t4_delta(double skewness);

/// v_t = sum_i ar_i v_{t-i} + e_t + sum_j ma_j e_{t-j}, zero initial values.
struct ErrorModel {
    std::string name = "iid";
    std::vector<double> ar;
    std::vector<double> ma;

    static ErrorModel iid() { return {}; }
    /// v_t = -0.5 v_{t-1} + e_t - 0.5 e_{t-1}.
    static ErrorModel paper_arma() { return {"arma(-0.5,-0.5)", {-0.5}, {-0.5}}; }
};

/// "iid", "arma" or "arma(-0.5,-0.5)"; throws ParameterError otherwise.
ErrorModel make_error_model(std::string_view name);

/// Spectral radius of the companion matrix of the lag coefficients (0 for an empty vector).
double companion_spectral_radius(const std::vector<double>& coefficients);

struct DgpConfig {
    std::size_t t_len = 100;
    double h = 0.0;  ///< rho = 1 + h / T
    double mu = 0.0;
    ErrorModel error_model;
    std::string innovation = "gaussian";
};

/**
 * @brief Y_t = mu + X_t, X_t = rho X_{t-1} + v_t with X_0 = 0, t = 1..T.
 *
 * Throws ParameterError for h > 0, T < 3, an unknown innovation, or AR/MA
 * coefficients whose companion matrices have spectral radius >= 1.
 */
TimeSeries generate(const DgpConfig& cfg, Engine& rng);

/// Draw the innovations only (used to share them across h values).
std::vector<double> draw_innovations(const InnovationLaw& law, std::size_t n, Engine& rng);

/// Build the series from given innovations.
TimeSeries build_series(const DgpConfig& cfg, std::span<const double> innovations);

/// One test attached to a study: name in {ahrt, ahrt-signed, hrt, ers, df-rho}.
struct StudyTest {
    std::string name;
    std::string reference;  ///< rank tests only

    std::string label() const { return reference.empty() ? name : name + "-" + reference; }
};

/// Parse "ahrt-gaussian", "ahrt-signed-laplace", "hrt-t3", "ers", "df-rho", ...
StudyTest parse_study_test(std::string_view label);

struct StudyDgp {
    std::string innovation = "gaussian";
    ErrorModel error_model;
    std::size_t t_len = 100;
};

struct StudyConfig {
    std::vector<StudyTest> tests;
    std::vector<StudyDgp> dgps;
    std::vector<double> h_grid;
    std::size_t n_rep = 20000;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    int p = 0;
    double alpha = 0.05;
    double mu = 0.0;
    CvMode cv_mode = CvMode::polynomial;
    bool theory_mode = false;
    std::size_t cv_reps = kDefaultCvReps;
    std::size_t grid_points = kDefaultGridPoints;
};

struct StudyRow {
    std::string test;
    std::string innovation;
    std::string error_model;
    std::size_t t_len = 0;
    double h = 0.0;
    std::size_t n_rep = 0;
    double reject_rate = 0.0;
    double mc_se = 0.0;
    std::size_t failures = 0;
    bool in_family = true;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    std::size_t n_rep = 0;
    double runtime_seconds = 0.0;
    bool interrupted = false;
};

/// Header line of the study CSV (without newline).
std::string study_csv_header();
/// One CSV line (without newline).
std::string study_csv_row(const StudyRow& row);

/**
 * @brief Rejection frequencies for every (dgp, h, test) cell.
 *
 * Replication r of a dgp uses the same innovations for every h and every
 * test. Rows are produced in (dgp, h, test) order; on_row is called once per
 * row as soon as its cell is finished. Setting *stop makes the study return
 * after the current cell without reporting it. A replication whose test throws
 * counts as a failure; more than 0.1% failures in a cell throws Error.
 */
StudyResult run_study(const StudyConfig& cfg, const std::function<void(const StudyRow&)>& on_row = {},
                      const std::atomic<bool>* stop = nullptr);

/// Names of the built-in study presets.
std::vector<std::string> preset_names();

/// paper-desk, paper-fig1 or paper-fig3 (seed left at 0, set by the caller).
StudyConfig study_preset(std::string_view name);

}  // namespace hrt
