#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "tristrat/market_data.hpp"

namespace tristrat {

// Series are column vectors indexed by trading day. Warm-up entries hold
// quiet NaN, which is the only "absent" marker; test with is_absent().

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
constexpr Scalar absent_value() {
    return std::numeric_limits<Scalar>::quiet_NaN();
}

template <typename Scalar>
bool is_absent(Scalar v) {
    return std::isnan(v);
}

struct IndicatorParams {
    int sma_window = 20;
    int atr_window = 14;
    int rsi_window = 14;
    int macd_fast = 12;
    int macd_slow = 26;
    int macd_signal = 9;
    int boll_window = 20;
    double boll_k = 2.0;
};

template <typename Derived>
Series<typename Derived::Scalar> sma(const Eigen::MatrixBase<Derived>& closes, int window) {
    using Scalar = typename Derived::Scalar;
    if (window < 1) throw std::invalid_argument("sma: window must be >= 1");
    const Eigen::Index n = closes.size();
    Series<Scalar> out = Series<Scalar>::Constant(n, absent_value<Scalar>());
    Scalar running = 0;
    for (Eigen::Index d = 0; d < n; ++d) {
        running += closes(d);
        if (d >= window) running -= closes(d - window);
        if (d + 1 >= window) out(d) = running / Scalar(window);
    }
    return out;
}

/// EMA with alpha = 2/(n+1), seeded by the SMA of the first `window` defined
/// inputs. Leading NaNs in the input are skipped.
template <typename Derived>
Series<typename Derived::Scalar> ema(const Eigen::MatrixBase<Derived>& values, int window) {
    using Scalar = typename Derived::Scalar;
    if (window < 1) throw std::invalid_argument("ema: window must be >= 1");
    const Eigen::Index n = values.size();
    Series<Scalar> out = Series<Scalar>::Constant(n, absent_value<Scalar>());
    Eigen::Index start = 0;
    while (start < n && is_absent(values(start))) ++start;
    if (n - start < window) return out;

    const Eigen::Index seed = start + window - 1;
    out(seed) = values.segment(start, window).mean();
    const Scalar alpha = Scalar(2) / Scalar(window + 1);
    for (Eigen::Index d = seed + 1; d < n; ++d) out(d) = alpha * values(d) + (Scalar(1) - alpha) * out(d - 1);
    return out;
}

/// Wilder-smoothed average true range. TR starts at the second bar.
template <typename DerivedH, typename DerivedL, typename DerivedC>
Series<typename DerivedC::Scalar> atr(const Eigen::MatrixBase<DerivedH>& high, const Eigen::MatrixBase<DerivedL>& low,
                                     const Eigen::MatrixBase<DerivedC>& close, int window = 14) {
    using Scalar = typename DerivedC::Scalar;
    if (window < 1) throw std::invalid_argument("atr: window must be >= 1");
    const Eigen::Index n = close.size();
    if (high.size() != n || low.size() != n) throw std::invalid_argument("atr: series length mismatch");
    Series<Scalar> out = Series<Scalar>::Constant(n, absent_value<Scalar>());
    if (n < window + 1) return out;

    auto true_range = [&](Eigen::Index d) {
        const Scalar prev = close(d - 1);
        return std::max({high(d) - low(d), std::abs(high(d) - prev), std::abs(low(d) - prev)});
    };
    Scalar seed = 0;
    for (Eigen::Index d = 1; d <= window; ++d) seed += true_range(d);
    out(window) = seed / Scalar(window);
    for (Eigen::Index d = window + 1; d < n; ++d)
        out(d) = (out(d - 1) * Scalar(window - 1) + true_range(d)) / Scalar(window);
    return out;
}

/// Wilder RSI. No gains and no losses over the smoothing state reads 50.
template <typename Derived>
Series<typename Derived::Scalar> rsi(const Eigen::MatrixBase<Derived>& closes, int window = 14) {
    using Scalar = typename Derived::Scalar;
    if (window < 1) throw std::invalid_argument("rsi: window must be >= 1");
    const Eigen::Index n = closes.size();
    Series<Scalar> out = Series<Scalar>::Constant(n, absent_value<Scalar>());
    if (n < window + 1) return out;

    auto value = [](Scalar gain, Scalar loss) -> Scalar {
        if (loss == 0) return gain == 0 ? Scalar(50) : Scalar(100);
        if (gain == 0) return Scalar(0);
        return Scalar(100) - Scalar(100) / (Scalar(1) + gain / loss);
    };
    Scalar gain = 0;
    Scalar loss = 0;
    for (Eigen::Index d = 1; d <= window; ++d) {
        const Scalar change = closes(d) - closes(d - 1);
        if (change > 0) gain += change; else loss -= change;
    }
    gain /= Scalar(window);
    loss /= Scalar(window);
    out(window) = value(gain, loss);
    for (Eigen::Index d = window + 1; d < n; ++d) {
        const Scalar change = closes(d) - closes(d - 1);
        gain = (gain * Scalar(window - 1) + std::max(change, Scalar(0))) / Scalar(window);
        loss = (loss * Scalar(window - 1) + std::max(-change, Scalar(0))) / Scalar(window);
        out(d) = value(gain, loss);
    }
    return out;
}

template <typename Scalar>
struct MacdSeries {
    Series<Scalar> line;
    Series<Scalar> signal;
    Series<Scalar> hist;
};

template <typename Derived>
MacdSeries<typename Derived::Scalar> macd(const Eigen::MatrixBase<Derived>& closes, int fast = 12, int slow = 26,
                                          int signal = 9) {
    using Scalar = typename Derived::Scalar;
    if (fast < 1 || signal < 1) throw std::invalid_argument("macd: windows must be >= 1");
    if (slow <= fast) throw std::invalid_argument("macd: slow window must exceed fast window");
    MacdSeries<Scalar> out;
    out.line = ema(closes, fast) - ema(closes, slow); // NaN propagates through the warm-up
    out.signal = ema(out.line, signal);
    out.hist = out.line - out.signal;
    return out;
}

template <typename Scalar>
struct BollingerSeries {
    Series<Scalar> upper;
    Series<Scalar> mid;
    Series<Scalar> lower;
};

/// Bands at mid +/- k * population standard deviation.
template <typename Derived>
BollingerSeries<typename Derived::Scalar> bollinger(const Eigen::MatrixBase<Derived>& closes, int window = 20,
                                                    double k = 2.0) {
    using Scalar = typename Derived::Scalar;
    if (window < 1) throw std::invalid_argument("bollinger: window must be >= 1");
    const Eigen::Index n = closes.size();
    BollingerSeries<Scalar> out;
    out.mid = Series<Scalar>::Constant(n, absent_value<Scalar>());
    out.upper = out.mid;
    out.lower = out.mid;
    for (Eigen::Index d = window - 1; d < n; ++d) {
        const auto segment = closes.segment(d - window + 1, window);
        const Scalar mean = segment.mean();
        const Scalar sigma = std::sqrt((segment.array() - mean).square().mean());
        out.mid(d) = mean;
        out.upper(d) = mean + Scalar(k) * sigma;
        out.lower(d) = mean - Scalar(k) * sigma;
    }
    return out;
}

struct IndicatorRow {
    Date date;
    double close = 0.0;
    std::optional<double> sma;
    std::optional<double> atr;
    std::optional<double> rsi;
    std::optional<double> macd_line;
    std::optional<double> macd_signal;
    std::optional<double> macd_hist;
    std::optional<double> boll_upper;
    std::optional<double> boll_mid;
    std::optional<double> boll_lower;
};

/// One row per bar of a single stock's date-ascending series.
std::vector<IndicatorRow> indicator_table(const std::vector<DailyBar>& bars, const IndicatorParams& params = {});

} // namespace tristrat
