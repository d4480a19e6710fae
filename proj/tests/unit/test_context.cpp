#include <doctest.h>

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "fixture.hpp"
#include "tristrat/context.hpp"
#include "tristrat/indicators.hpp"

using namespace tristrat;

namespace {

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1; }

struct World {
    fixture::Spec spec;
    BarStore store{fixture::make_bars(spec)};
    TradingCalendar calendar = build_trading_calendar(store.all());
    std::vector<IndicatorRow> rows = indicator_table(store.series(StockId("ALPH")));
};

NewsItem item(const char* date, const char* title, const char* stock = "ALPH") {
    return {StockId(stock), parse_date(date), title, "summary"};
}

} // namespace

TEST_CASE("tech input has one line per trading day") {
    World w;
    const auto four_full = build_tech_input(StockId("ALPH"), 5, w.calendar, w.rows);
    CHECK(line_count(four_full) == 1 + 20);
    const auto with_holiday = build_tech_input(StockId("ALPH"), 8, w.calendar, w.rows);
    CHECK(line_count(with_holiday) == 1 + 19);
    CHECK(with_holiday == build_tech_input(StockId("ALPH"), 8, w.calendar, w.rows));
    CHECK(four_full.find("2024-02-05") == std::string::npos); // week 5 itself is never shown
    CHECK_THROWS_AS(build_tech_input(StockId("ALPH"), 3, w.calendar, w.rows), WarmupError);
}

TEST_CASE("news window is the ISO span of the previous week") {
    World w;
    CHECK(build_news_input(StockId("ALPH"), 5, w.calendar, {}) == kNoNewsSentinel);

    std::vector<NewsItem> news{item("2024-02-01", "c"), item("2024-01-29", "a"), item("2024-02-04", "d"),
                               item("2024-01-30", "b"), item("2024-02-05", "in week t"),
                               item("2024-01-28", "too old"), item("2024-01-30", "other", "BETA")};
    std::mt19937 rng(5);
    std::shuffle(news.begin(), news.end(), rng);
    const auto text = build_news_input(StockId("ALPH"), 5, w.calendar, news);
    CHECK(line_count(text) == 1 + 4);
    const auto a = text.find("] a:"), b = text.find("] b:"), c = text.find("] c:"), d = text.find("] d:");
    CHECK(a < b);
    CHECK(b < c);
    CHECK(c < d);
    CHECK(d != std::string::npos);
    CHECK(text.find("in week t") == std::string::npos);
    CHECK(text.find("too old") == std::string::npos);
    CHECK(text.find("other") == std::string::npos);
}

TEST_CASE("fundamentals respect the release cutoff") {
    World w;
    CHECK(build_fund_input(StockId("ALPH"), 5, w.calendar, {}) == kNoFundamentalsSentinel);

    const auto fund = fixture::make_fundamentals(w.spec);
    const auto week5 = build_fund_input(StockId("ALPH"), 5, w.calendar, fund); // 2023Q4 lands Wed of week 5
    CHECK(week5.find("2023Q4") == std::string::npos);
    CHECK(week5.find("### 2023Q3") != std::string::npos);
    CHECK(std::count(week5.begin(), week5.end(), '#') == 2 * 3);
    const auto week6 = build_fund_input(StockId("ALPH"), 6, w.calendar, fund);
    CHECK(week6.find("### 2023Q4") != std::string::npos);

    std::vector<FundamentalReport> six;
    const char* quarters[] = {"2022Q3", "2022Q4", "2023Q1", "2023Q2", "2023Q3", "2023Q4"};
    const char* releases[] = {"2022-11-01", "2023-02-01", "2023-05-01", "2023-08-01", "2023-11-01", "2024-01-20"};
    for (int i = 5; i >= 0; --i)
        six.push_back({StockId("ALPH"), FiscalQuarter::parse(quarters[i]), parse_date(releases[i]), {{"eps", 1.0 * i}}});
    const auto newest = build_fund_input(StockId("ALPH"), 5, w.calendar, six);
    CHECK(newest.find("2022Q4") == std::string::npos);
    CHECK(newest.find("2023Q1") < newest.find("2023Q4"));
    CHECK(std::count(newest.begin(), newest.end(), '#') == 4 * 3);
}

TEST_CASE("overview") {
    const auto o = build_overview(StockId("ALPH"), 5, "news view", "", "fund view");
    CHECK(o.text.find("## NEWS ANALYSIS\nnews view") != std::string::npos);
    CHECK(o.text.find("## TECHNICAL ANALYSIS\n(empty report)") != std::string::npos);
    CHECK(o.text.find("## FUNDAMENTAL ANALYSIS\nfund view") != std::string::npos);
    CHECK(o.text == build_overview(StockId("ALPH"), 5, "news view", "", "fund view").text);
}

TEST_CASE("truncation keeps the header and newest lines") {
    std::string text = "header";
    for (int i = 0; i < 50; ++i) text += fmt::format("\nline {:02d}", i);
    const auto cut = truncate_oldest(text, 120);
    CHECK(cut.size() <= 120);
    CHECK(cut.rfind("header", 0) == 0);
    CHECK(cut.find("line 49") != std::string::npos);
    CHECK(cut.find("line 00") == std::string::npos);
    CHECK(cut.find("older lines truncated") != std::string::npos);
    CHECK(truncate_oldest("short", 100) == "short");
}
