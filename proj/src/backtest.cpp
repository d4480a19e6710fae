#include "tristrat/backtest.hpp"

#include <cmath>

#include <fmt/format.h>

namespace tristrat {

std::vector<StockId> ReturnVector::stocks() const {
    std::vector<StockId> out;
    out.reserve(returns.size());
    for (const auto& [s, _] : returns) out.push_back(s);
    return out;
}

double ReturnVector::universe_average() const {
    if (returns.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [_, r] : returns) total += r;
    return total / static_cast<double>(returns.size());
}

ExecutionPrices execution_prices(const StockId& stock, const TradingWeek& week, const BarStore& bars) {
    const DailyBar* first = bars.find(stock, week.first_day());
    const DailyBar* last = bars.find(stock, week.last_day());
    if (!first || !last)
        throw MissingBoundaryBar(fmt::format("{} has no bar on {} of week {}", stock.str(),
                                             format_date(first ? week.last_day() : week.first_day()), week.index));
    return {stock, week.index, first->open, last->close};
}

double stock_return(const ExecutionPrices& prices) {
    if (!(prices.buy > 0.0) || !(prices.sell > 0.0))
        throw std::invalid_argument("execution prices must be positive");
    return (prices.sell - prices.buy) / prices.buy;
}

double portfolio_return(const Portfolio& portfolio, const ReturnVector& returns) {
    std::vector<StockId> order;
    Eigen::VectorXd r(static_cast<Eigen::Index>(portfolio.weights.size()));
    for (const auto& [stock, _] : portfolio.weights) {
        auto it = returns.returns.find(stock);
        if (it == returns.returns.end())
            throw std::invalid_argument(fmt::format("no return for weighted stock {}", stock.str()));
        r(static_cast<Eigen::Index>(order.size())) = it->second;
        order.push_back(stock);
    }
    return portfolio.to_vector(order).dot(r);
}

Settlement run_settlement(const TradingWeek& week, const Portfolio& portfolio, const BarStore& bars,
                          const std::vector<StockId>& tradable) {
    Settlement s;
    s.returns.week = week.index;
    for (const auto& stock : tradable)
        s.returns.returns[stock] = stock_return(execution_prices(stock, week, bars));

    s.result.week = week.index;
    s.result.portfolio = portfolio;
    s.result.portfolio_return = portfolio_return(portfolio, s.returns);
    s.result.universe_avg_return = s.returns.universe_average();
    s.result.cash_fraction = portfolio.cash_fraction();
    return s;
}

void EquityCurve::push(double weekly_return) {
    if (!std::isfinite(weekly_return) || weekly_return < -1.0)
        throw std::invalid_argument(fmt::format("weekly return {} is not a valid fraction", weekly_return));
    wealth_.push_back(current() * (1.0 + weekly_return));
    returns_.push_back(weekly_return);
}

void EquityCurve::restore(std::vector<double> wealth, std::vector<double> returns) {
    if (wealth.size() != returns.size()) throw std::invalid_argument("equity restore: length mismatch");
    wealth_ = std::move(wealth);
    returns_ = std::move(returns);
}

} // namespace tristrat
