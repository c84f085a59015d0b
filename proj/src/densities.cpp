#include "hrt/densities.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hrt/error.hpp"

namespace hrt {

namespace {

constexpr double kQuadEdge = 1e-10;
constexpr double kQuadTol = 1e-10;
constexpr double kQuadMaxError = 1e-7;

void require_open_unit(double u, const char* who) {
    if (!(u > 0.0 && u < 1.0)) {
        std::ostringstream os;
        os << who << ": probability " << u << " is outside (0, 1)";
        throw DomainError(os.str());
    }
}

const boost::math::normal_distribution<double>& std_normal() {
    static const boost::math::normal_distribution<double> dist(0.0, 1.0);
    return dist;
}

const boost::math::students_t_distribution<double>& t3_dist() {
    static const boost::math::students_t_distribution<double> dist(3.0);
    return dist;
}

void check_quadrature(double value, double error, const char* what) {
    if (!std::isfinite(value) || error > kQuadMaxError * std::max(1.0, std::abs(value))) {
        std::ostringstream os;
        os << what << ": quadrature did not converge (value " << value << ", error estimate " << error << ")";
        throw NumericalError(os.str());
    }
}

// Tanh-sinh on (0, 1/2) and (1/2, 1); the split keeps the Laplace score jump on a panel edge.
template <typename F>
double integrate_unit(F&& f, const char* what) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto inside = [&](double u) { return f(std::clamp(u, kQuadEdge, 1.0 - kQuadEdge)); };
    double e1 = 0.0;
    double e2 = 0.0;
    const double value = ts.integrate(inside, 0.0, 0.5, kQuadTol, &e1) + ts.integrate(inside, 0.5, 1.0, kQuadTol, &e2);
    check_quadrature(value, e1 + e2, what);
    return value;
}

}  // namespace

// ---------------------------------------------------------------- Gaussian

double GaussianDensity::quantile(double u) const {
    require_open_unit(u, "gaussian quantile");
    return boost::math::quantile(std_normal(), u);
}

double GaussianDensity::cdf(double x) const { return boost::math::cdf(std_normal(), x); }

double GaussianDensity::pdf(double x) const {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------- Laplace

double LaplaceDensity::sigma() const { return std::numbers::sqrt2; }

double LaplaceDensity::score(double x) const { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double LaplaceDensity::quantile(double u) const {
    require_open_unit(u, "laplace quantile");
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
}

double LaplaceDensity::cdf(double x) const {
    return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
}

double LaplaceDensity::pdf(double x) const { return 0.5 * std::exp(-std::abs(x)); }

// ---------------------------------------------------------------- Student t3

double StudentT3Density::sigma() const { return std::sqrt(3.0); }

double StudentT3Density::score(double x) const { return 4.0 * x / (3.0 + x * x); }

double StudentT3Density::quantile(double u) const {
    require_open_unit(u, "t3 quantile");
    return boost::math::quantile(t3_dist(), u);
}

double StudentT3Density::cdf(double x) const { return boost::math::cdf(t3_dist(), x); }

double StudentT3Density::pdf(double x) const { return boost::math::pdf(t3_dist(), x); }

// ---------------------------------------------------------------- factories

DensityPtr make_reference(std::string_view name) {
    if (name == "gaussian") return std::make_shared<GaussianDensity>();
    if (name == "laplace") return std::make_shared<LaplaceDensity>();
    if (name == "t3") return std::make_shared<StudentT3Density>();
    std::ostringstream os;
    os << "unknown reference density '" << name << "' (expected gaussian, laplace, t3 or estimated)";
    throw ParameterError(os.str());
}

std::vector<std::string> reference_names() { return {"gaussian", "laplace", "t3", "estimated"}; }

double score_at_rank_quantile(const ReferenceDensity& g, long i, long n) {
    if (n <= 0) throw DomainError("score_at_rank_quantile: n must be positive");
    const double u = static_cast<double>(i) / static_cast<double>(n);
    require_open_unit(u, "score_at_rank_quantile");
    return g.sigma() * g.score(g.quantile(u));
}

std::shared_ptr<const std::vector<double>> rank_scores(const ReferenceDensity& g, long n, long denom,
                                                       bool signed_scores) {
    if (n <= 0 || denom <= n) throw DomainError("rank_scores: need 0 < n < denom");

    auto compute = [&] {
        std::vector<double> u(static_cast<std::size_t>(n));
        for (long i = 1; i <= n; ++i) {
            const double frac = static_cast<double>(i) / static_cast<double>(denom);
            u[static_cast<std::size_t>(i - 1)] = signed_scores ? 0.5 + 0.5 * frac : frac;
        }
        std::vector<double> x;
        if (const auto* kde = dynamic_cast<const KernelDensityEstimate*>(&g)) {
            x = kde->quantiles_sorted(u);
        } else {
            x.resize(u.size());
            std::transform(u.begin(), u.end(), x.begin(), [&](double p) { return g.quantile(p); });
        }
        auto out = std::make_shared<std::vector<double>>(x.size());
        const double s = g.sigma();
        std::transform(x.begin(), x.end(), out->begin(), [&](double v) { return s * g.score(v); });
        return std::shared_ptr<const std::vector<double>>(std::move(out));
    };

    if (dynamic_cast<const KernelDensityEstimate*>(&g) != nullptr) return compute();

    using Key = std::tuple<std::string, long, long, bool>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const std::vector<double>>> cache;
    Key key{std::string(g.name()), n, denom, signed_scores};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto table = compute();
    std::lock_guard lock(mutex);
    return cache.emplace(std::move(key), std::move(table)).first->second;
}

// ---------------------------------------------------------------- quadrature

CrossMoments cross_moments(const ReferenceDensity& f, const ReferenceDensity& g) {
    const double sf = f.sigma();
    const double sg = g.sigma();
    CrossMoments out;
    out.sigma_eps_phi_g = sg / sf *
                          integrate_unit([&](double u) { return f.quantile(u) * g.score(g.quantile(u)); },
                                         "cross_moments(sigma_eps_phi_g)");
    out.j_fg = sf * sg *
               integrate_unit([&](double u) { return f.score(f.quantile(u)) * g.score(g.quantile(u)); },
                              "cross_moments(j_fg)");
    return out;
}

double cross_information_x_space(const ReferenceDensity& f, const ReferenceDensity& g) {
    auto integrand = [&](double x) {
        const double u = std::clamp(f.cdf(x), kQuadEdge, 1.0 - kQuadEdge);
        return f.score(x) * g.score(g.quantile(u)) * f.pdf(x);
    };
    boost::math::quadrature::exp_sinh<double> es;
    double e1 = 0.0;
    double e2 = 0.0;
    const double right = es.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), kQuadTol, &e1);
    const double left =
        es.integrate([&](double x) { return integrand(-x); }, 0.0, std::numeric_limits<double>::infinity(), kQuadTol, &e2);
    check_quadrature(left + right, e1 + e2, "cross_information_x_space");
    return f.sigma() * g.sigma() * (left + right);
}

double fisher_info_by_quadrature(const ReferenceDensity& g) {
    const double s = g.sigma();
    return s * s *
           integrate_unit(
               [&](double u) {
                   const double v = g.score(g.quantile(u));
                   return v * v;
               },
               "fisher_info_by_quadrature");
}

}  // namespace hrt
