#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "tristrat/market_data.hpp"
#include "tristrat/portfolio.hpp"

namespace tristrat {

struct ExecutionPrices {
    StockId stock;
    int week = 0;
    double buy = 0.0;  // open of the first trading day
    double sell = 0.0; // close of the last trading day
};

/// Thrown when a stock lacks a bar on a week boundary day.
class MissingBoundaryBar : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReturnVector {
    int week = 0;
    std::map<StockId, double> returns; // exactly the tradable universe

    std::vector<StockId> stocks() const;
    double universe_average() const;
};

struct WeeklyResult {
    int week = 0;
    Portfolio portfolio;
    double portfolio_return = 0.0;
    double universe_avg_return = 0.0;
    double cash_fraction = 1.0;
};

struct Settlement {
    WeeklyResult result;
    ReturnVector returns;
};

ExecutionPrices execution_prices(const StockId& stock, const TradingWeek& week, const BarStore& bars);

/// (sell - buy) / buy.
double stock_return(const ExecutionPrices& prices);

/// w^T r over the weighted stocks; cash earns zero.
double portfolio_return(const Portfolio& portfolio, const ReturnVector& returns);

/// Settles `portfolio` for `week`, computing returns for every stock in `tradable`.
Settlement run_settlement(const TradingWeek& week, const Portfolio& portfolio, const BarStore& bars,
                          const std::vector<StockId>& tradable);

/// W_0 = 1, W_t = W_{t-1} (1 + R_t).
class EquityCurve {
public:
    void push(double weekly_return);
    /// Restores a curve from stored levels (resume path).
    void restore(std::vector<double> wealth, std::vector<double> returns);

    double current() const noexcept { return wealth_.empty() ? 1.0 : wealth_.back(); }
    const std::vector<double>& wealth() const noexcept { return wealth_; }
    const std::vector<double>& returns() const noexcept { return returns_; }
    std::size_t size() const noexcept { return wealth_.size(); }

private:
    std::vector<double> wealth_;
    std::vector<double> returns_;
};

} // namespace tristrat
