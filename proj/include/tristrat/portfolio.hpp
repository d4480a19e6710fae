#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tristrat/market_data.hpp"

namespace tristrat {

inline constexpr double kWeightSumTolerance = 1e-9;

/// Capital fractions for one holding week. Missing keys hold zero; the
/// unallocated remainder is cash.
struct Portfolio {
    int week = 0;
    std::map<StockId, double> weights;

    double invested() const;
    double cash_fraction() const {
        const double c = 1.0 - invested();
        return c < 1e-12 ? 0.0 : c;
    }
    std::size_t positions() const;

    /// Weights laid out in `order`; absent stocks map to 0.
    Eigen::VectorXd to_vector(const std::vector<StockId>& order) const;

    static Portfolio all_cash(int week) { return Portfolio{week, {}}; }

    friend bool operator==(const Portfolio&, const Portfolio&) = default;
};

/// First invariant violation, or nullopt when `p` is a valid agent portfolio:
/// weights in [0,1], sum <= 1 + 1e-9, at most `max_positions` nonzero,
/// every key in `tradable`.
std::optional<std::string> portfolio_violation(const Portfolio& p, const std::vector<StockId>& tradable,
                                               std::size_t max_positions);

/// Drops non-positive weights, keeps the `max_positions` largest (ties to the
/// lexicographically smaller ticker), then scales by 1/sum if sum > 1.
Portfolio repair_portfolio(const Portfolio& p, std::size_t max_positions);

} // namespace tristrat
