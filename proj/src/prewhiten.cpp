#include "hrt/prewhiten.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "hrt/error.hpp"

namespace hrt {

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {}

std::vector<double> TimeSeries::differences() const {
    std::vector<double> d;
    if (values_.size() < 2) return d;
    d.reserve(values_.size() - 1);
    for (std::size_t t = 1; t < values_.size(); ++t) d.push_back(values_[t] - values_[t - 1]);
    return d;
}

std::vector<double> apply_lag_polynomial(std::span<const double> x, std::span<const double> gamma) {
    const std::size_t p = gamma.size();
    std::vector<double> out;
    if (x.size() <= p) return out;
    out.reserve(x.size() - p);
    for (std::size_t t = p; t < x.size(); ++t) {
        double v = x[t];
        for (std::size_t i = 0; i < p; ++i) v -= gamma[i] * x[t - 1 - i];
        out.push_back(v);
    }
    return out;
}

ArFit fit_ar(const TimeSeries& y, int p, bool include_level) {
    const std::size_t T = y.size();
    if (p < 0) throw ParameterError("fit_ar: lag order must be nonnegative");
    if (T < static_cast<std::size_t>(p) + 3) {
        std::ostringstream os;
        os << "fit_ar: need T >= p + 3 observations (T = " << T << ", p = " << p << ")";
        throw ParameterError(os.str());
    }
    ArFit fit;
    fit.p = p;
    fit.include_level = include_level;
    fit.differences = y.differences();
    fit.t_total = T;
    const auto& d = fit.differences;  // d[k] = Delta Y_{k+2}
    const auto up = static_cast<std::size_t>(p);
    const std::size_t n = T - up - 1;  // t = p+2..T
    const Eigen::Index cols = 1 + (include_level ? 1 : 0) + p;

    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), cols);
    Eigen::VectorXd target(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t t = r + up + 2;  // 1-based time index
        const std::size_t k = t - 2;       // d index of Delta Y_t
        Eigen::Index c = 0;
        X(static_cast<Eigen::Index>(r), c++) = 1.0;
        if (include_level) X(static_cast<Eigen::Index>(r), c++) = y[t - 2];  // Y_{t-1}
        for (std::size_t i = 1; i <= up; ++i) X(static_cast<Eigen::Index>(r), c++) = d[k - i];
        target(static_cast<Eigen::Index>(r)) = include_level ? y[t - 1] : d[k];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-12);
    if (qr.rank() < cols) {
        std::ostringstream os;
        os << "fit_ar: design matrix is rank deficient (rank " << qr.rank() << " of " << cols << ")";
        throw RankDeficiencyError(os.str());
    }
    const Eigen::VectorXd beta = qr.solve(target);
    const Eigen::VectorXd resid = target - X * beta;

    Eigen::Index c = 0;
    fit.intercept = beta(c++);
    if (include_level) fit.rho_hat = beta(c++);
    fit.gamma_hat.assign(beta.data() + c, beta.data() + beta.size());
    fit.ols_residuals.assign(resid.data(), resid.data() + resid.size());
    if (include_level) {
        fit.residuals = fit.ols_residuals;
    } else {
        fit.residuals = apply_lag_polynomial(d, fit.gamma_hat);
    }
    return fit;
}

double snap_to_grid(double value, double step) {
    const double k = value / step;
    const double mag = std::ceil(std::abs(k) - 0.5);  // halfway -> toward zero
    return std::copysign(mag, k) * step;
}

ArFit discretize(const ArFit& fit, std::size_t t_total) {
    if (fit.discretized) throw ParameterError("discretize: fit is already discretized");
    if (fit.include_level) throw ParameterError("discretize: only aligned (difference) fits are discretized");
    if (t_total == 0) throw ParameterError("discretize: T must be positive");
    ArFit out = fit;
    const double step = 1.0 / std::sqrt(static_cast<double>(t_total));
    for (double& g : out.gamma_hat) g = snap_to_grid(g, step);
    out.residuals = apply_lag_polynomial(out.differences, out.gamma_hat);
    out.discretized = true;
    return out;
}

}  // namespace hrt
