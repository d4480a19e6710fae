#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tristrat {

using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`. Throws std::invalid_argument on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Monday of the ISO-8601 week containing `d`.
Date iso_week_start(Date d);

/// Exchange ticker, uppercase, 1-6 chars.
class StockId {
public:
    StockId() = default;
    explicit StockId(std::string symbol);

    const std::string& str() const noexcept { return symbol_; }

    friend auto operator<=>(const StockId&, const StockId&) = default;
    friend bool operator==(const StockId&, const StockId&) = default;

private:
    std::string symbol_;
};

struct DailyBar {
    StockId stock;
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

struct NewsItem {
    StockId stock;
    Date date;
    std::string title;
    std::string summary;
};

struct FiscalQuarter {
    int year = 0;
    int quarter = 0; // 1..4

    static FiscalQuarter parse(std::string_view label);
    std::string label() const;
    Date end_date() const;

    friend auto operator<=>(const FiscalQuarter&, const FiscalQuarter&) = default;
};

struct FundamentalReport {
    StockId stock;
    FiscalQuarter fiscal_quarter;
    Date release_date;
    std::map<std::string, double> statements;
};

/// Raised by loaders for rows that cannot be parsed at all.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Raised for well-formed records that break a domain invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BarFormat { Csv, JsonLines };

std::vector<DailyBar> load_daily_bars(std::istream& source, BarFormat format = BarFormat::Csv);
std::vector<NewsItem> load_news(std::istream& source);
std::vector<FundamentalReport> load_fundamentals(std::istream& source);

// Canonical serializers. Numbers use the shortest round-trip representation.
void write_daily_bars(std::ostream& out, const std::vector<DailyBar>& bars);
void write_news(std::ostream& out, const std::vector<NewsItem>& items);
void write_fundamentals(std::ostream& out, const std::vector<FundamentalReport>& reports);

std::string format_number(double value);

struct DateRange {
    Date first;
    Date last;

    bool contains(Date d) const noexcept { return first <= d && d <= last; }
};

struct TradingWeek {
    int index = 0;                 // 1-based, contiguous
    std::vector<Date> trading_days; // strictly ascending, one ISO week

    Date first_day() const { return trading_days.front(); }
    Date last_day() const { return trading_days.back(); }
    Date iso_monday() const { return iso_week_start(first_day()); }
    Date iso_sunday() const { return iso_monday() + std::chrono::days{6}; }
};

class TradingCalendar {
public:
    TradingCalendar() = default;
    explicit TradingCalendar(std::vector<TradingWeek> weeks);

    const std::vector<TradingWeek>& weeks() const noexcept { return weeks_; }
    std::size_t size() const noexcept { return weeks_.size(); }
    bool empty() const noexcept { return weeks_.empty(); }

    /// Week by 1-based index; throws std::out_of_range.
    const TradingWeek& week(int t) const;
    /// Week whose ISO span contains `d`, if it has trading days.
    std::optional<int> week_of(Date d) const;

private:
    std::vector<TradingWeek> weeks_;
};

/// Raised when a lookback window reaches before week 1.
class WarmupError : public std::runtime_error {
public:
    WarmupError(int first_valid_week, const std::string& what);
    int first_valid_week() const noexcept { return first_valid_week_; }

private:
    int first_valid_week_;
};

TradingCalendar build_trading_calendar(const std::vector<DailyBar>& bars,
                                       std::optional<DateRange> range = std::nullopt);

/// Weeks t-lookback .. t-1, oldest first.
std::vector<TradingWeek> week_slice(const TradingCalendar& calendar, int t, int lookback);

/// Indexed view over a loaded bar set.
class BarStore {
public:
    BarStore() = default;
    explicit BarStore(std::vector<DailyBar> bars);

    const std::vector<DailyBar>& all() const noexcept { return bars_; }
    std::vector<StockId> symbols() const;

    /// Bars of one stock, date-ascending. Empty when unknown.
    const std::vector<DailyBar>& series(const StockId& stock) const;
    const DailyBar* find(const StockId& stock, Date date) const;

    /// Stocks from `universe` with a bar on both boundary days of `week`.
    std::vector<StockId> tradable(const TradingWeek& week, const std::vector<StockId>& universe) const;

private:
    std::vector<DailyBar> bars_;
    std::map<StockId, std::vector<DailyBar>> by_stock_;
};

} // namespace tristrat
