#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tristrat/indicators.hpp"
#include "tristrat/market_data.hpp"

namespace tristrat {

inline constexpr const char* kNoNewsSentinel = "NO NEWS THIS WEEK";
inline constexpr const char* kNoFundamentalsSentinel = "NO FUNDAMENTALS AVAILABLE";

struct ContextConfig {
    int tech_lookback_weeks = 4;
    int news_lookback_weeks = 1;
    std::size_t max_fundamental_quarters = 4;
    std::size_t max_section_chars = 12000;
};

struct StockWeekContext {
    StockId stock;
    int week = 0;
    std::string tech_text;
    std::string news_text;
    std::string fund_text;
};

struct DataOverview {
    StockId stock;
    int week = 0;
    std::string text;
};

/// Daily close and defined indicators for the lookback weeks before `t`,
/// one line per day the stock traded. `rows` is the stock's indicator table.
std::string build_tech_input(const StockId& stock, int t, const TradingCalendar& calendar,
                             const std::vector<IndicatorRow>& rows, const ContextConfig& config = {});

/// News of `stock` dated inside the ISO span of the weeks preceding `t`.
std::string build_news_input(const StockId& stock, int t, const TradingCalendar& calendar,
                             const std::vector<NewsItem>& news, const ContextConfig& config = {});

/// Up to four newest quarters released strictly before week t's first trading day.
std::string build_fund_input(const StockId& stock, int t, const TradingCalendar& calendar,
                             const std::vector<FundamentalReport>& fundamentals, const ContextConfig& config = {});

/// Joins the three analyses as `## SECTION` blocks in news, tech, fund order.
DataOverview build_overview(const StockId& stock, int week, const std::string& news_analysis,
                            const std::string& tech_analysis, const std::string& fund_analysis);

/// Drops the oldest lines after the first (header) line until `text` fits `max_chars`.
std::string truncate_oldest(const std::string& text, std::size_t max_chars);

} // namespace tristrat
