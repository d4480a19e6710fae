#include <doctest.h>

#include "fixture.hpp"
#include "tristrat/backtest.hpp"

using namespace tristrat;

namespace {

DailyBar bar(const char* s, const char* d, double open, double close) {
    return {StockId(s), parse_date(d), open, std::max(open, close) + 1, std::min(open, close) - 1, close, 10};
}

ReturnVector returns(std::map<std::string, double> r) {
    ReturnVector out;
    for (const auto& [k, v] : r) out.returns[StockId(k)] = v;
    return out;
}

Portfolio weights(std::map<std::string, double> w) {
    Portfolio p;
    for (const auto& [k, v] : w) p.weights[StockId(k)] = v;
    return p;
}

} // namespace

TEST_CASE("execution prices") {
    BarStore store({bar("A", "2024-01-08", 100, 101), bar("A", "2024-01-09", 101, 102), bar("A", "2024-01-12", 104, 105),
                    bar("B", "2024-01-08", 50, 51), bar("B", "2024-01-11", 52, 53)});
    const auto cal = build_trading_calendar(store.all());
    const auto a = execution_prices(StockId("A"), cal.week(1), store);
    CHECK(a.buy == 100);
    CHECK(a.sell == 105);
    CHECK_THROWS_AS(execution_prices(StockId("B"), cal.week(1), store), MissingBoundaryBar);

    BarStore thursday({bar("C", "2024-01-08", 10, 11), bar("C", "2024-01-11", 12, 13)});
    const auto tc = build_trading_calendar(thursday.all());
    CHECK(execution_prices(StockId("C"), tc.week(1), thursday).sell == 13);

    BarStore single({bar("D", "2024-01-10", 20, 21)});
    const auto sc = build_trading_calendar(single.all());
    const auto d = execution_prices(StockId("D"), sc.week(1), single);
    CHECK(d.buy == 20);
    CHECK(d.sell == 21);
}

TEST_CASE("stock return") {
    CHECK(stock_return({StockId("A"), 1, 100, 105}) == doctest::Approx(0.05));
    CHECK(stock_return({StockId("A"), 1, 100, 100}) == 0.0);
    CHECK(stock_return({StockId("A"), 1, 80, 60}) == doctest::Approx(-0.25));
}

TEST_CASE("portfolio return") {
    CHECK(portfolio_return(Portfolio{}, returns({{"A", 0.1}})) == 0.0);
    CHECK(portfolio_return(weights({{"A", 0.5}, {"B", 0.5}}), returns({{"A", 0.1}, {"B", -0.02}})) ==
          doctest::Approx(0.04));
    CHECK(portfolio_return(weights({{"A", 0.6}}), returns({{"A", 0.05}, {"B", 0.3}})) == doctest::Approx(0.03));
    CHECK_THROWS(portfolio_return(weights({{"Z", 0.6}}), returns({{"A", 0.05}})));
}

TEST_CASE("settlement") {
    BarStore store({bar("A", "2024-01-08", 100, 100), bar("A", "2024-01-12", 100, 110), bar("B", "2024-01-08", 100, 100),
                    bar("B", "2024-01-12", 100, 90), bar("C", "2024-01-08", 100, 100), bar("C", "2024-01-12", 100, 103)});
    const auto cal = build_trading_calendar(store.all());
    const std::vector<StockId> ab{StockId("A"), StockId("B")};
    const auto cash = run_settlement(cal.week(1), Portfolio::all_cash(1), store, ab);
    CHECK(cash.result.portfolio_return == 0.0);
    CHECK(cash.result.universe_avg_return == doctest::Approx(0.0));
    CHECK(cash.result.cash_fraction == 1.0);

    const std::vector<StockId> abc{StockId("A"), StockId("B"), StockId("C")};
    auto third = weights({{"A", 1.0 / 3}, {"B", 1.0 / 3}, {"C", 1.0 / 3}});
    const auto eq = run_settlement(cal.week(1), third, store, abc);
    CHECK(eq.result.portfolio_return == doctest::Approx(eq.result.universe_avg_return));
    CHECK(eq.result.universe_avg_return == doctest::Approx(0.01));
    CHECK(eq.returns.returns.size() == 3);
}

TEST_CASE("fixture settlement matches a hand-built row") {
    fixture::Spec spec;
    BarStore store(fixture::make_bars(spec));
    const auto cal = build_trading_calendar(store.all());
    const auto& week = cal.week(7); // Monday holiday
    const auto universe = store.symbols();
    auto eq = Portfolio{7, {}};
    for (const auto& s : universe) eq.weights[s] = 1.0 / 6;
    const auto settled = run_settlement(week, eq, store, universe);

    double sum = 0;
    for (const auto& s : universe) {
        const auto& series = store.series(s);
        double open = 0, close = 0;
        for (const auto& b : series) {
            if (format_date(b.date) == "2024-02-20") open = b.open; // Tuesday
            if (format_date(b.date) == "2024-02-23") close = b.close;
        }
        const double r = (close - open) / open;
        CHECK(settled.returns.returns.at(s) == doctest::Approx(r).epsilon(1e-14));
        sum += r;
    }
    CHECK(settled.result.universe_avg_return == doctest::Approx(sum / 6).epsilon(1e-13));
}

TEST_CASE("equity curve") {
    EquityCurve curve;
    CHECK(curve.current() == 1.0);
    curve.push(0.1);
    curve.push(-0.5);
    CHECK(curve.current() == doctest::Approx(0.55));
    CHECK(curve.size() == 2);
    CHECK_THROWS(curve.push(-1.5));
}
