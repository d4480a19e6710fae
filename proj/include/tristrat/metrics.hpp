#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <Eigen/Core>

namespace tristrat {

/// A ratio whose denominator vanished. Reported as undefined, never as inf.
class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// All functions take a column of weekly portfolio returns R_t as fractions.

/// prod(1 + R_t) - 1.
template <typename Derived>
typename Derived::Scalar accumulated_return(const Eigen::DenseBase<Derived>& returns) {
    using Scalar = typename Derived::Scalar;
    if (returns.size() == 0) return Scalar(0);
    return (returns.derived().array() + Scalar(1)).prod() - Scalar(1);
}

/// Weekly mean over sample (n-1) standard deviation, zero risk-free rate,
/// not annualized.
template <typename Derived>
typename Derived::Scalar sharpe(const Eigen::DenseBase<Derived>& returns) {
    using Scalar = typename Derived::Scalar;
    const auto n = returns.size();
    if (n < 2) throw UndefinedMetric("sharpe: needs at least two returns");
    if (returns.maxCoeff() == returns.minCoeff()) throw UndefinedMetric("sharpe: zero variance");
    const Scalar mean = returns.mean();
    const Scalar variance = (returns.derived().array() - mean).square().sum() / Scalar(n - 1);
    if (!(variance > 0)) throw UndefinedMetric("sharpe: zero variance");
    return mean / std::sqrt(variance);
}

/// Wealth W_t = W_{t-1}(1 + R_t) with W_0 = 1; the initial capital counts as
/// a peak.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> wealth_curve(const Eigen::DenseBase<Derived>& returns) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> wealth(returns.size());
    Scalar w = 1;
    for (Eigen::Index t = 0; t < returns.size(); ++t) {
        w *= Scalar(1) + returns(t);
        wealth(t) = w;
    }
    return wealth;
}

/// min_t (W_t - max_{i<=t} W_i) / max_{i<=t} W_i, in [-1, 0].
template <typename Derived>
typename Derived::Scalar max_drawdown(const Eigen::DenseBase<Derived>& returns) {
    using Scalar = typename Derived::Scalar;
    Scalar wealth = 1;
    Scalar peak = 1;
    Scalar worst = 0;
    for (Eigen::Index t = 0; t < returns.size(); ++t) {
        wealth *= Scalar(1) + returns(t);
        peak = std::max(peak, wealth);
        worst = std::min(worst, (wealth - peak) / peak);
    }
    return worst;
}

template <typename Scalar>
Scalar calmar(Scalar accumulated, Scalar mdd) {
    if (mdd == Scalar(0)) throw UndefinedMetric("calmar: no drawdown");
    return accumulated / std::abs(mdd);
}

struct MetricsReport {
    double accumulated_return = 0.0;
    std::optional<double> sharpe;
    std::optional<double> calmar;
    double max_drawdown = 0.0;
    int weeks = 0;
};

template <typename Derived>
MetricsReport compute_metrics(const Eigen::DenseBase<Derived>& returns) {
    MetricsReport report;
    report.weeks = static_cast<int>(returns.size());
    report.accumulated_return = accumulated_return(returns);
    report.max_drawdown = max_drawdown(returns);
    try {
        report.sharpe = sharpe(returns);
    } catch (const UndefinedMetric&) {
    }
    try {
        report.calmar = calmar(report.accumulated_return, report.max_drawdown);
    } catch (const UndefinedMetric&) {
    }
    return report;
}

} // namespace tristrat
