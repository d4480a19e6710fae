#include "tristrat/portfolio.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace tristrat {

double Portfolio::invested() const {
    double total = 0.0;
    for (const auto& [_, w] : weights) total += w;
    return total;
}

std::size_t Portfolio::positions() const {
    return static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [](const auto& kv) { return kv.second != 0.0; }));
}

Eigen::VectorXd Portfolio::to_vector(const std::vector<StockId>& order) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto it = weights.find(order[i]);
        if (it != weights.end()) out(static_cast<Eigen::Index>(i)) = it->second;
    }
    return out;
}

std::optional<std::string> portfolio_violation(const Portfolio& p, const std::vector<StockId>& tradable,
                                               std::size_t max_positions) {
    for (const auto& [stock, w] : p.weights) {
        if (!std::isfinite(w) || w < 0.0 || w > 1.0)
            return fmt::format("weight for {} is {}, outside [0,1]", stock.str(), w);
        if (std::find(tradable.begin(), tradable.end(), stock) == tradable.end())
            return fmt::format("{} is not in this week's tradable universe", stock.str());
    }
    if (p.positions() > max_positions)
        return fmt::format("{} nonzero positions, at most {} allowed", p.positions(), max_positions);
    if (p.invested() > 1.0 + kWeightSumTolerance)
        return fmt::format("weights sum to {}, more than 1", p.invested());
    return std::nullopt;
}

Portfolio repair_portfolio(const Portfolio& p, std::size_t max_positions) {
    std::vector<std::pair<StockId, double>> kept;
    for (const auto& [stock, w] : p.weights)
        if (std::isfinite(w) && w > 0.0) kept.emplace_back(stock, w);
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (kept.size() > max_positions) kept.resize(max_positions);

    Portfolio out{p.week, {}};
    double total = 0.0;
    for (const auto& [_, w] : kept) total += w;
    const double scale = total > 1.0 ? 1.0 / total : 1.0;
    for (const auto& [stock, w] : kept) out.weights[stock] = std::min(w * scale, 1.0);
    return out;
}

} // namespace tristrat
