#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "hrt/error.hpp"
#include "hrt/mcharness.hpp"

namespace hrt {

namespace {

constexpr double kSkewNormalTarget = 0.8145;
constexpr double kSkewT4Target = 2.7;

class GaussianLaw final : public InnovationLaw {
public:
    std::string_view name() const override { return "gaussian"; }
    double draw(Engine& rng) const override { return std::normal_distribution<double>{}(rng); }
    bool in_family() const override { return true; }
};

class LaplaceLaw final : public InnovationLaw {
public:
    std::string_view name() const override { return "laplace"; }
    double draw(Engine& rng) const override {
        std::exponential_distribution<double> e;
        const double a = e(rng);
        return std::numbers::sqrt2 / 2.0 * (a - e(rng));
    }
    bool in_family() const override { return true; }
};

class StudentLaw final : public InnovationLaw {
public:
    StudentLaw(double dof, std::string name, bool in_family)
        : dof_(dof), name_(std::move(name)), in_family_(in_family),
          scale_(dof > 2.0 ? std::sqrt((dof - 2.0) / dof) : 1.0) {}
    std::string_view name() const override { return name_; }
    double draw(Engine& rng) const override { return scale_ * std::student_t_distribution<double>{dof_}(rng); }
    bool in_family() const override { return in_family_; }

private:
    double dof_;
    std::string name_;
    bool in_family_;
    double scale_;
};

class SkewNormalLaw final : public InnovationLaw {
public:
    SkewNormalLaw()
        : delta_(skew_normal_delta(kSkewNormalTarget)),
          mean_(delta_ * std::sqrt(2.0 / std::numbers::pi)),
          sd_(std::sqrt(1.0 - 2.0 * delta_ * delta_ / std::numbers::pi)) {}
    std::string_view name() const override { return "skewnormal"; }
    double draw(Engine& rng) const override {
        std::normal_distribution<double> n;
        const double u0 = n(rng);
        const double u1 = n(rng);
        const double z = delta_ * std::abs(u0) + std::sqrt(1.0 - delta_ * delta_) * u1;
        return (z - mean_) / sd_;
    }
    bool in_family() const override { return true; }

private:
    double delta_;
    double mean_;
    double sd_;
};

// Azzalini skew-t with 4 degrees of freedom: Z / sqrt(V / 4), Z skew-normal, V chi-square(4).
class SkewT4Law final : public InnovationLaw {
public:
    SkewT4Law() : delta_(skew_t4_delta(kSkewT4Target)), sd_(std::sqrt(2.0 - delta_ * delta_)) {}
    std::string_view name() const override { return "skew-t4"; }
    double draw(Engine& rng) const override {
        std::normal_distribution<double> n;
        const double u0 = n(rng);
        const double u1 = n(rng);
        const double z = delta_ * std::abs(u0) + std::sqrt(1.0 - delta_ * delta_) * u1;
        const double v = std::chi_squared_distribution<double>{4.0}(rng);
        // mean of Z / sqrt(V / 4) is delta when nu = 4
        return (z / std::sqrt(v / 4.0) - delta_) / sd_;
    }
    bool in_family() const override { return false; }

private:
    double delta_;
    double sd_;
};

double solve_delta(double (*skew)(double), double target, const char* what) {
    const double hi = 1.0 - 1e-12;
    if (!(target > 0.0) || !(skew(hi) > target)) {
        std::ostringstream os;
        os << what << ": skewness " << target << " is not attainable";
        throw ParameterError(os.str());
    }
    auto f = [&](double d) { return skew(d) - target; };
    const auto r = boost::math::tools::bisect(f, 0.0, hi, boost::math::tools::eps_tolerance<double>(52));
    return 0.5 * (r.first + r.second);
}

void check_lag_polynomial(const std::vector<double>& c, const char* what) {
    const double radius = companion_spectral_radius(c);
    if (!(radius < 1.0)) {
        std::ostringstream os;
        os << "error model: " << what << " companion matrix has spectral radius " << radius << " >= 1";
        throw ParameterError(os.str());
    }
}

}  // namespace

double skew_normal_skewness(double delta) {
    const double m = delta * std::sqrt(2.0 / std::numbers::pi);
    return (4.0 - std::numbers::pi) / 2.0 * m * m * m / std::pow(1.0 - m * m, 1.5);
}

double skew_t4_skewness(double delta) {
    // mu [nu (3 - d^2)/(nu - 3) - 3 nu/(nu - 2) + 2 mu^2] / [nu/(nu - 2) - mu^2]^(3/2), nu = 4, mu = d
    const double mu = delta;
    return mu * (4.0 * (3.0 - delta * delta) - 6.0 + 2.0 * mu * mu) / std::pow(2.0 - mu * mu, 1.5);
}

double skew_normal_delta(double skewness) { return solve_delta(&skew_normal_skewness, skewness, "skew-normal"); }

double skew_t4_delta(double skewness) { return solve_delta(&skew_t4_skewness, skewness, "skew-t4"); }

InnovationPtr make_innovation(std::string_view name) {
    if (name == "gaussian") return std::make_shared<GaussianLaw>();
    if (name == "laplace") return std::make_shared<LaplaceLaw>();
    if (name == "t3") return std::make_shared<StudentLaw>(3.0, "t3", true);
    if (name == "t4") return std::make_shared<StudentLaw>(4.0, "t4", true);
    if (name == "t2") return std::make_shared<StudentLaw>(2.0, "t2", false);
    if (name == "t1") return std::make_shared<StudentLaw>(1.0, "t1", false);
    if (name == "skewnormal") return std::make_shared<SkewNormalLaw>();
    if (name == "skew-t4") return std::make_shared<SkewT4Law>();
    std::ostringstream os;
    os << "unknown innovation '" << name << "' (valid:";
    for (const auto& n : innovation_names()) os << " " << n;
    os << ")";
    throw ParameterError(os.str());
}

std::vector<std::string> innovation_names() {
    return {"gaussian", "laplace", "t3", "t2", "t1", "t4", "skewnormal", "skew-t4"};
}

ErrorModel make_error_model(std::string_view name) {
    if (name == "iid") return ErrorModel::iid();
    if (name == "arma" || name == "arma(-0.5,-0.5)") return ErrorModel::paper_arma();
    throw ParameterError("unknown error model '" + std::string(name) + "' (valid: iid arma)");
}

double companion_spectral_radius(const std::vector<double>& coefficients) {
    const auto p = static_cast<Eigen::Index>(coefficients.size());
    if (p == 0) return 0.0;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) c(0, j) = coefficients[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < p; ++i) c(i, i - 1) = 1.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(c, false).eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> draw_innovations(const InnovationLaw& law, std::size_t n, Engine& rng) {
    std::vector<double> e(n);
    for (double& x : e) x = law.draw(rng);
    return e;
}

TimeSeries build_series(const DgpConfig& cfg, std::span<const double> innovations) {
    if (cfg.h > 0.0) throw ParameterError("dgp: h must be <= 0");
    if (cfg.t_len < 3) throw ParameterError("dgp: need T >= 3");
    if (innovations.size() != cfg.t_len) throw ParameterError("dgp: need exactly T innovations");
    check_lag_polynomial(cfg.error_model.ar, "AR");
    std::vector<double> ma_inverse(cfg.error_model.ma.size());
    for (std::size_t j = 0; j < ma_inverse.size(); ++j) ma_inverse[j] = -cfg.error_model.ma[j];
    check_lag_polynomial(ma_inverse, "MA");

    const std::size_t T = cfg.t_len;
    const double rho = 1.0 + cfg.h / static_cast<double>(T);
    const auto& ar = cfg.error_model.ar;
    const auto& ma = cfg.error_model.ma;
    std::vector<double> v(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double x = innovations[t];
        for (std::size_t i = 0; i < ar.size() && i < t; ++i) x += ar[i] * v[t - 1 - i];
        for (std::size_t j = 0; j < ma.size() && j < t; ++j) x += ma[j] * innovations[t - 1 - j];
        v[t] = x;
    }
    std::vector<double> y(T);
    double level = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        level = rho * level + v[t];
        y[t] = cfg.mu + level;
    }
    return TimeSeries(std::move(y));
}

TimeSeries generate(const DgpConfig& cfg, Engine& rng) {
    const auto law = make_innovation(cfg.innovation);
    return build_series(cfg, draw_innovations(*law, cfg.t_len, rng));
}

}  // namespace hrt
