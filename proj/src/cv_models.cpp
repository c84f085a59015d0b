#include <cmath>
#include <string>
#include <vector>

#include "hrt/error.hpp"
#include "hrt/limitsim.hpp"

namespace hrt {

namespace {

CriticalValueModel make(const char* name, double j_g, bool symmetric, std::array<double, 5> c, const char* source,
                        double max_residual) {
    CriticalValueModel m;
    m.reference_name = name;
    m.alpha = 0.05;
    m.h_bar_per_sigma = -7.0;
    m.coefficients = c;
    m.domain_lo = 0.0;
    m.domain_hi = std::sqrt(j_g);
    m.symmetric = symmetric;
    m.max_abs_residual = max_residual;
    m.source = source;
    return m;
}

// fit_cv_polynomial(name, 0.05, symmetric, 0.01, {200000, 2500, 20240601}); Laplace and t3 coincide
// because the limit statistic depends on J_g only through J_g / sigma^2.
const std::vector<CriticalValueModel>& refit_models() {
    static const std::vector<CriticalValueModel> models{
        make("gaussian", 1.0, false, {0.975146, 1.655766, -2.339873, 2.571821, -1.020555}, "refit", 0.0091),
        make("laplace", 2.0, false, {0.281851, 1.954898, -2.001647, 1.555246, -0.420789}, "refit", 0.0179),
        make("t3", 2.0, false, {0.281851, 1.954898, -2.001647, 1.555246, -0.420789}, "refit", 0.0179),
        make("gaussian", 1.0, true, {0.219603, 2.615188, -0.823308, -0.292464, 0.128755}, "refit", 0.0049),
        make("laplace", 2.0, true, {-1.123001, 2.906866, -0.667767, 0.029325, 0.008182}, "refit", 0.0095),
        make("t3", 2.0, true, {-1.123001, 2.906866, -0.667767, 0.029325, 0.008182}, "refit", 0.0095),
    };
    return models;
}

const std::vector<CriticalValueModel>& published_models() {
    static const std::vector<CriticalValueModel> models{
        make("gaussian", 1.0, false, {0.96, 1.88, -3.98, 6.74, -5.45}, "paper_table1", 0.0),
        make("laplace", 2.0, false, {0.25, 2.30, -3.58, 4.30, -2.45}, "paper_table1", 0.0),
        make("t3", 2.0, false, {0.25, 2.30, -3.58, 4.30, -2.45}, "paper_table1", 0.0),
    };
    return models;
}

}  // namespace

const CriticalValueModel& default_cv_model(std::string_view g_name, bool symmetric) {
    for (const auto& m : refit_models()) {
        if (m.reference_name == g_name && m.symmetric == symmetric) return m;
    }
    throw ParameterError("no built-in critical-value polynomial for reference '" + std::string(g_name) + "'");
}

const CriticalValueModel& paper_table1_model(std::string_view g_name) {
    for (const auto& m : published_models()) {
        if (m.reference_name == g_name) return m;
    }
    throw ParameterError("no published critical-value polynomial for reference '" + std::string(g_name) + "'");
}

}  // namespace hrt
