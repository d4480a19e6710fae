#include "tristrat/baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace tristrat {

FactorKind parse_factor_kind(const std::string& name) {
    if (name == "sma") return FactorKind::Sma;
    if (name == "macd") return FactorKind::Macd;
    if (name == "boll") return FactorKind::Boll;
    throw std::invalid_argument(fmt::format("unknown factor '{}'", name));
}

const char* to_string(FactorKind kind) {
    switch (kind) {
        case FactorKind::Sma: return "sma";
        case FactorKind::Macd: return "macd";
        case FactorKind::Boll: return "boll";
    }
    return "sma";
}

Portfolio equal_weight(int week, const std::vector<StockId>& universe) {
    if (universe.empty()) throw std::invalid_argument("equal_weight: empty universe");
    Portfolio p{week, {}};
    const double w = 1.0 / static_cast<double>(universe.size());
    for (const auto& s : universe) p.weights[s] = w;
    return p;
}

std::optional<double> factor_score(FactorKind kind, Date as_of, const std::vector<IndicatorRow>& rows) {
    auto it = std::upper_bound(rows.begin(), rows.end(), as_of,
                               [](Date d, const IndicatorRow& r) { return d < r.date; });
    if (it == rows.begin()) return std::nullopt;
    const IndicatorRow& row = *std::prev(it);
    switch (kind) {
        case FactorKind::Sma:
            if (!row.sma) return std::nullopt;
            return row.close / *row.sma - 1.0;
        case FactorKind::Macd:
            return row.macd_hist;
        case FactorKind::Boll: {
            if (!row.boll_upper || !row.boll_lower) return std::nullopt;
            const double width = *row.boll_upper - *row.boll_lower;
            if (!(width > 0.0)) return std::nullopt;
            return (row.close - *row.boll_lower) / width;
        }
    }
    return std::nullopt;
}

Portfolio top_n_portfolio(int week, const std::map<StockId, double>& factors, std::size_t count, double weight) {
    std::vector<std::pair<StockId, double>> ranked(factors.begin(), factors.end());
    // std::map iteration is ticker-ascending, so stable_sort keeps ties in ticker order.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > count) ranked.resize(count);
    Portfolio p{week, {}};
    for (const auto& [stock, _] : ranked) p.weights[stock] = weight;
    return p;
}

} // namespace tristrat
