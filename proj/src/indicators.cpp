#include "tristrat/indicators.hpp"

namespace tristrat {

namespace {

std::optional<double> defined(double v) {
    if (is_absent(v)) return std::nullopt;
    return v;
}

} // namespace

std::vector<IndicatorRow> indicator_table(const std::vector<DailyBar>& bars, const IndicatorParams& params) {
    const auto n = static_cast<Eigen::Index>(bars.size());
    Eigen::VectorXd high(n), low(n), close(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& b = bars[static_cast<std::size_t>(i)];
        if (i > 0 && !(bars[static_cast<std::size_t>(i - 1)].date < b.date))
            throw std::invalid_argument("indicator_table: bars must be date-ascending");
        high(i) = b.high;
        low(i) = b.low;
        close(i) = b.close;
    }

    const auto sma_s = sma(close, params.sma_window);
    const auto atr_s = atr(high, low, close, params.atr_window);
    const auto rsi_s = rsi(close, params.rsi_window);
    const auto macd_s = macd(close, params.macd_fast, params.macd_slow, params.macd_signal);
    const auto boll_s = bollinger(close, params.boll_window, params.boll_k);

    std::vector<IndicatorRow> rows;
    rows.reserve(bars.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        IndicatorRow r;
        r.date = bars[static_cast<std::size_t>(i)].date;
        r.close = close(i);
        r.sma = defined(sma_s(i));
        r.atr = defined(atr_s(i));
        r.rsi = defined(rsi_s(i));
        r.macd_line = defined(macd_s.line(i));
        r.macd_signal = defined(macd_s.signal(i));
        r.macd_hist = defined(macd_s.hist(i));
        r.boll_upper = defined(boll_s.upper(i));
        r.boll_mid = defined(boll_s.mid(i));
        r.boll_lower = defined(boll_s.lower(i));
        rows.push_back(r);
    }
    return rows;
}

} // namespace tristrat
