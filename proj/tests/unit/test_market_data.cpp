#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "fixture.hpp"
#include "tristrat/market_data.hpp"

using namespace tristrat;

namespace {

std::vector<DailyBar> parse_bars(const std::string& body) {
    std::istringstream in("symbol,date,open,high,low,close,volume\n" + body);
    return load_daily_bars(in);
}

std::vector<DailyBar> weekday_bars(const std::string& symbol, const std::vector<std::string>& dates) {
    std::vector<DailyBar> out;
    for (const auto& d : dates) out.push_back({StockId(symbol), parse_date(d), 10, 11, 9, 10.5, 100});
    return out;
}

} // namespace

TEST_CASE("dates and ISO weeks") {
    CHECK(format_date(parse_date("2022-05-16")) == "2022-05-16");
    CHECK_THROWS_AS(parse_date("2022-02-30"), std::invalid_argument);
    CHECK_THROWS_AS(parse_date("2022/05/16"), std::invalid_argument);
    CHECK(iso_week_start(parse_date("2022-05-22")) == parse_date("2022-05-16")); // Sunday
    CHECK(iso_week_start(parse_date("2022-05-16")) == parse_date("2022-05-16"));
}

TEST_CASE("ticker validation") {
    CHECK(StockId("BRK.B").str() == "BRK.B");
    CHECK_THROWS(StockId("aapl"));
    CHECK_THROWS(StockId(""));
    CHECK_THROWS(StockId("TOOLONG"));
}

TEST_CASE("bar CSV parsing") {
    auto bars = parse_bars("AAPL,2022-05-16,145.0,147.0,144.0,146.0,1000\n");
    REQUIRE(bars.size() == 1);
    CHECK(bars[0].stock == StockId("AAPL"));
    CHECK(bars[0].date == parse_date("2022-05-16"));
    CHECK(bars[0].open == 145.0);
    CHECK(bars[0].high == 147.0);
    CHECK(bars[0].low == 144.0);
    CHECK(bars[0].close == 146.0);
    CHECK(bars[0].volume == 1000.0);

    CHECK_THROWS_AS(parse_bars("AAPL,2022-05-16,145.0,143.0,144.0,146.0,1000\n"), ValidationError);
    CHECK_THROWS_AS(parse_bars("AAPL,2022-05-16,145.0,147.0,144.0\n"), ParseError);
    CHECK_THROWS_AS(parse_bars("AAPL,2022-05-16,x,147.0,144.0,146.0,1\n"), ParseError);
    CHECK_THROWS_AS(parse_bars("AAPL,2022-05-16,145,147,144,146,1\nAAPL,2022-05-16,145,147,144,146,1\n"),
                    ValidationError);
}

TEST_CASE("corrupt row reports its line number") {
    try {
        parse_bars("AAPL,2022-05-16,145,147,144,146,1\nAAPL,2022-05-17,145,147,144\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("shuffled bars come back grouped and date-sorted") {
    std::vector<std::string> rows;
    for (int i = 0; i < 5; ++i) {
        rows.push_back(fmt::format("MSFT,2022-05-{:02d},10,11,9,10,1", 16 + i));
        rows.push_back(fmt::format("AAPL,2022-05-{:02d},10,11,9,10,1", 16 + i));
    }
    std::mt19937 rng(3);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::string body;
    for (const auto& r : rows) body += r + "\n";
    auto bars = parse_bars(body);
    REQUIRE(bars.size() == 10);

    // Oracle: sort the raw (symbol, date) strings lexicographically.
    std::vector<std::pair<std::string, std::string>> expected;
    for (const auto& r : rows) expected.emplace_back(r.substr(0, 4), r.substr(5, 10));
    std::sort(expected.begin(), expected.end());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        CHECK(bars[i].stock.str() == expected[i].first);
        CHECK(format_date(bars[i].date) == expected[i].second);
    }
}

TEST_CASE("bar writer round-trips") {
    const auto bars = fixture::make_bars({});
    std::ostringstream out;
    write_daily_bars(out, bars);
    std::istringstream in(out.str());
    const auto again = load_daily_bars(in);
    REQUIRE(again.size() == bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        CHECK(again[i].close == bars[i].close);
        CHECK(again[i].date == bars[i].date);
    }
}

TEST_CASE("news loading") {
    std::istringstream empty("");
    CHECK(load_news(empty).empty());

    std::istringstream missing(R"({"symbol":"AAPL","date":"2022-05-16","summary":"s"})");
    CHECK_THROWS_AS(load_news(missing), ParseError);

    std::istringstream three(R"({"symbol":"MSFT","date":"2022-05-17","title":"c"}
{"symbol":"AAPL","date":"2022-05-17","title":"b"}
{"symbol":"AAPL","date":"2022-05-16","title":"a"})");
    auto items = load_news(three);
    REQUIRE(items.size() == 3);
    std::vector<std::tuple<std::string, std::string>> got, expected = {
        {"AAPL", "2022-05-16"}, {"AAPL", "2022-05-17"}, {"MSFT", "2022-05-17"}};
    for (const auto& n : items) got.emplace_back(n.stock.str(), format_date(n.date));
    CHECK(got == expected);
    CHECK(items[0].title == "a");
}

TEST_CASE("fundamentals loading") {
    std::istringstream ok(
        R"({"symbol":"AAPL","fiscal_quarter":"2023Q4","release_date":"2024-02-01","statements":{"eps":2.1}})");
    auto reports = load_fundamentals(ok);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].fiscal_quarter.label() == "2023Q4");
    CHECK(reports[0].statements.at("eps") == 2.1);

    std::istringstream early(
        R"({"symbol":"AAPL","fiscal_quarter":"2023Q4","release_date":"2023-12-01","statements":{}})");
    CHECK_THROWS(load_fundamentals(early));
    CHECK(FiscalQuarter::parse("2023Q4").end_date() == parse_date("2023-12-31"));
    CHECK_THROWS(FiscalQuarter::parse("2023Q5"));
}

TEST_CASE("trading calendar") {
    SUBCASE("one full week") {
        auto cal = build_trading_calendar(
            weekday_bars("A", {"2024-01-08", "2024-01-09", "2024-01-10", "2024-01-11", "2024-01-12"}));
        REQUIRE(cal.size() == 1);
        CHECK(cal.week(1).first_day() == parse_date("2024-01-08"));
        CHECK(cal.week(1).last_day() == parse_date("2024-01-12"));
    }
    SUBCASE("Monday holiday") {
        auto cal = build_trading_calendar(weekday_bars("A", {"2024-02-20", "2024-02-21", "2024-02-23"}));
        CHECK(cal.week(1).first_day() == parse_date("2024-02-20"));
        CHECK(cal.week(1).trading_days.size() == 3);
    }
    SUBCASE("empty middle week is skipped") {
        auto cal = build_trading_calendar(weekday_bars("A", {"2024-01-08", "2024-01-12", "2024-01-22", "2024-01-26"}));
        REQUIRE(cal.size() == 2);
        CHECK(cal.week(1).index == 1);
        CHECK(cal.week(2).index == 2);
        CHECK(cal.week(2).first_day() == parse_date("2024-01-22"));
        CHECK(cal.week_of(parse_date("2024-01-24")) == 2);
    }
    SUBCASE("range restricts days") {
        auto cal = build_trading_calendar(weekday_bars("A", {"2024-01-08", "2024-01-15", "2024-01-22"}),
                                          DateRange{parse_date("2024-01-10"), parse_date("2024-01-31")});
        CHECK(cal.size() == 2);
    }
}

TEST_CASE("week slices") {
    fixture::Spec spec;
    const auto cal = build_trading_calendar(fixture::make_bars(spec));
    REQUIRE(cal.size() == 12);
    auto s = week_slice(cal, 5, 4);
    REQUIRE(s.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(s[i].index == i + 1);
    CHECK_THROWS_AS(week_slice(cal, 2, 4), WarmupError);
    try {
        week_slice(cal, 2, 4);
    } catch (const WarmupError& e) {
        CHECK(e.first_valid_week() == 5);
    }
    auto one = week_slice(cal, 12, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].index == 11);
}

TEST_CASE("tradable set requires both boundary bars") {
    fixture::Spec spec;
    spec.missing = {{1, parse_date("2024-02-09")}}; // BETA, Friday of week 5
    BarStore store(fixture::make_bars(spec));
    const auto cal = build_trading_calendar(store.all());
    const auto tradable = store.tradable(cal.week(5), store.symbols());
    CHECK(tradable.size() == 5);
    CHECK(std::find(tradable.begin(), tradable.end(), StockId("BETA")) == tradable.end());
    CHECK(store.tradable(cal.week(6), store.symbols()).size() == 6);
}
