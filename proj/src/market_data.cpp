#include "tristrat/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace tristrat {

using json = nlohmann::json;
namespace chr = std::chrono;

namespace {

bool valid_symbol_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
}

double parse_number(std::string_view text, std::size_t line, std::string_view field) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
        throw ParseError(line, fmt::format("field '{}': not a number: '{}'", field, text));
    return value;
}

std::vector<std::string_view> split_csv(std::string_view row) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = row.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(row.substr(start));
            return out;
        }
        out.push_back(row.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim_cr(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

Date date_field(std::string_view text, std::size_t line, std::string_view field) {
    try {
        return parse_date(text);
    } catch (const std::invalid_argument&) {
        throw ParseError(line, fmt::format("field '{}': bad date '{}'", field, text));
    }
}

StockId symbol_field(std::string_view text, std::size_t line) {
    try {
        return StockId(std::string(text));
    } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
    }
}

void validate_bar(const DailyBar& b) {
    const auto name = fmt::format("{} {}", b.stock.str(), format_date(b.date));
    if (!(b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0))
        throw ValidationError(fmt::format("bar {}: prices must be positive", name));
    if (!(b.volume >= 0))
        throw ValidationError(fmt::format("bar {}: negative volume", name));
    if (!(b.low <= b.open && b.open <= b.high && b.low <= b.close && b.close <= b.high))
        throw ValidationError(fmt::format("bar {}: OHLC inversion (low {} high {})", name,
                                          format_number(b.low), format_number(b.high)));
}

double json_number(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key)) throw ParseError(line, fmt::format("missing field '{}'", key));
    const auto& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_number(v.get_ref<const std::string&>(), line, key);
    throw ParseError(line, fmt::format("field '{}': not a number", key));
}

std::string json_string(const json& j, const char* key, std::size_t line, bool required = true) {
    if (!j.contains(key) || j.at(key).is_null()) {
        if (required) throw ParseError(line, fmt::format("missing field '{}'", key));
        return {};
    }
    if (!j.at(key).is_string()) throw ParseError(line, fmt::format("field '{}': not a string", key));
    return j.at(key).get<std::string>();
}

/// Invokes `fn(json, line)` for each nonblank line.
template <typename Fn>
void for_each_json_line(std::istream& source, Fn&& fn) {
    std::string raw;
    std::size_t line = 0;
    while (std::getline(source, raw)) {
        ++line;
        auto text = trim_cr(raw);
        if (text.empty()) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(line, fmt::format("malformed JSON: {}", e.what()));
        }
        if (!j.is_object()) throw ParseError(line, "expected a JSON object");
        fn(j, line);
    }
}

void sort_and_check_bars(std::vector<DailyBar>& bars) {
    std::sort(bars.begin(), bars.end(), [](const DailyBar& a, const DailyBar& b) {
        return std::tie(a.stock, a.date) < std::tie(b.stock, b.date);
    });
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].stock == bars[i - 1].stock && bars[i].date == bars[i - 1].date)
            throw ValidationError(fmt::format("duplicate bar {} {}", bars[i].stock.str(),
                                              format_date(bars[i].date)));
    }
}

} // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw std::invalid_argument(fmt::format("bad date '{}'", text));
    auto digits = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
        if (ec != std::errc{} || ptr != text.data() + pos + len)
            throw std::invalid_argument(fmt::format("bad date '{}'", text));
        return v;
    };
    chr::year_month_day ymd{chr::year{digits(0, 4)}, chr::month{static_cast<unsigned>(digits(5, 2))},
                            chr::day{static_cast<unsigned>(digits(8, 2))}};
    if (!ymd.ok()) throw std::invalid_argument(fmt::format("bad date '{}'", text));
    return Date{ymd};
}

std::string format_date(Date d) {
    chr::year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

Date iso_week_start(Date d) {
    const unsigned iso = chr::weekday{d}.iso_encoding(); // Mon=1..Sun=7
    return d - chr::days{iso - 1};
}

StockId::StockId(std::string symbol) : symbol_(std::move(symbol)) {
    if (symbol_.empty() || symbol_.size() > 6 ||
        !std::all_of(symbol_.begin(), symbol_.end(), valid_symbol_char))
        throw std::invalid_argument(fmt::format("invalid ticker '{}'", symbol_));
}

FiscalQuarter FiscalQuarter::parse(std::string_view label) {
    if (label.size() != 6 || (label[4] != 'Q' && label[4] != 'q') || label[5] < '1' || label[5] > '4')
        throw std::invalid_argument(fmt::format("bad fiscal quarter '{}'", label));
    int year = 0;
    auto [ptr, ec] = std::from_chars(label.data(), label.data() + 4, year);
    if (ec != std::errc{} || ptr != label.data() + 4)
        throw std::invalid_argument(fmt::format("bad fiscal quarter '{}'", label));
    return {year, label[5] - '0'};
}

std::string FiscalQuarter::label() const { return fmt::format("{:04d}Q{}", year, quarter); }

Date FiscalQuarter::end_date() const {
    const chr::month last_month{static_cast<unsigned>(quarter * 3)};
    return Date{chr::year{year} / last_month / chr::last};
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

WarmupError::WarmupError(int first_valid_week, const std::string& what)
    : std::runtime_error(what), first_valid_week_(first_valid_week) {}

std::string format_number(double value) {
    char buf[128];
    const double mag = std::fabs(value);
    const auto fmt = mag == 0.0 || (mag >= 1e-4 && mag < 1e15) ? std::chars_format::fixed : std::chars_format::general;
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, fmt);
    return std::string(buf, ptr);
}

std::vector<DailyBar> load_daily_bars(std::istream& source, BarFormat format) {
    std::vector<DailyBar> bars;
    if (format == BarFormat::JsonLines) {
        for_each_json_line(source, [&](const json& j, std::size_t line) {
            DailyBar b;
            b.stock = symbol_field(json_string(j, "symbol", line), line);
            b.date = date_field(json_string(j, "date", line), line, "date");
            b.open = json_number(j, "open", line);
            b.high = json_number(j, "high", line);
            b.low = json_number(j, "low", line);
            b.close = json_number(j, "close", line);
            b.volume = json_number(j, "volume", line);
            validate_bar(b);
            bars.push_back(std::move(b));
        });
        sort_and_check_bars(bars);
        return bars;
    }

    std::string raw;
    std::size_t line = 0;
    bool header_seen = false;
    while (std::getline(source, raw)) {
        ++line;
        auto text = trim_cr(raw);
        if (text.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (text == "symbol,date,open,high,low,close,volume") continue;
            if (text.substr(0, 6) == "symbol") throw ParseError(line, "unexpected header");
        }
        auto fields = split_csv(text);
        if (fields.size() != 7)
            throw ParseError(line, fmt::format("expected 7 fields, got {}", fields.size()));
        DailyBar b;
        b.stock = symbol_field(trim_cr(fields[0]), line);
        b.date = date_field(trim_cr(fields[1]), line, "date");
        b.open = parse_number(trim_cr(fields[2]), line, "open");
        b.high = parse_number(trim_cr(fields[3]), line, "high");
        b.low = parse_number(trim_cr(fields[4]), line, "low");
        b.close = parse_number(trim_cr(fields[5]), line, "close");
        b.volume = parse_number(trim_cr(fields[6]), line, "volume");
        validate_bar(b);
        bars.push_back(std::move(b));
    }
    sort_and_check_bars(bars);
    return bars;
}

std::vector<NewsItem> load_news(std::istream& source) {
    std::vector<NewsItem> items;
    for_each_json_line(source, [&](const json& j, std::size_t line) {
        NewsItem n;
        n.stock = symbol_field(json_string(j, "symbol", line), line);
        n.date = date_field(json_string(j, "date", line), line, "date");
        n.title = json_string(j, "title", line);
        if (n.title.empty()) throw ParseError(line, "empty title");
        n.summary = json_string(j, "summary", line, false);
        items.push_back(std::move(n));
    });
    std::stable_sort(items.begin(), items.end(), [](const NewsItem& a, const NewsItem& b) {
        return std::tie(a.stock, a.date) < std::tie(b.stock, b.date);
    });
    return items;
}

std::vector<FundamentalReport> load_fundamentals(std::istream& source) {
    std::vector<FundamentalReport> reports;
    for_each_json_line(source, [&](const json& j, std::size_t line) {
        FundamentalReport r;
        r.stock = symbol_field(json_string(j, "symbol", line), line);
        try {
            r.fiscal_quarter = FiscalQuarter::parse(json_string(j, "fiscal_quarter", line));
        } catch (const std::invalid_argument& e) {
            throw ParseError(line, e.what());
        }
        r.release_date = date_field(json_string(j, "release_date", line), line, "release_date");
        if (!j.contains("statements") || !j.at("statements").is_object())
            throw ParseError(line, "missing object field 'statements'");
        for (const auto& [key, value] : j.at("statements").items()) {
            if (!value.is_number())
                throw ParseError(line, fmt::format("statement '{}' is not a number", key));
            r.statements.emplace(key, value.get<double>());
        }
        if (r.release_date <= r.fiscal_quarter.end_date())
            throw ValidationError(fmt::format("fundamentals {} {}: release {} not after quarter end",
                                              r.stock.str(), r.fiscal_quarter.label(),
                                              format_date(r.release_date)));
        reports.push_back(std::move(r));
    });
    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
        return std::tie(a.stock, a.fiscal_quarter) < std::tie(b.stock, b.fiscal_quarter);
    });
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].stock == reports[i - 1].stock &&
            reports[i].fiscal_quarter == reports[i - 1].fiscal_quarter)
            throw ValidationError(fmt::format("duplicate fundamentals {} {}", reports[i].stock.str(),
                                              reports[i].fiscal_quarter.label()));
    }
    return reports;
}

void write_daily_bars(std::ostream& out, const std::vector<DailyBar>& bars) {
    out << "symbol,date,open,high,low,close,volume\n";
    for (const auto& b : bars) {
        out << b.stock.str() << ',' << format_date(b.date) << ',' << format_number(b.open) << ','
            << format_number(b.high) << ',' << format_number(b.low) << ',' << format_number(b.close)
            << ',' << format_number(b.volume) << '\n';
    }
}

void write_news(std::ostream& out, const std::vector<NewsItem>& items) {
    for (const auto& n : items) {
        json j = json::object();
        j["symbol"] = n.stock.str();
        j["date"] = format_date(n.date);
        j["title"] = n.title;
        j["summary"] = n.summary;
        out << j.dump() << '\n';
    }
}

void write_fundamentals(std::ostream& out, const std::vector<FundamentalReport>& reports) {
    for (const auto& r : reports) {
        json j = json::object();
        j["symbol"] = r.stock.str();
        j["fiscal_quarter"] = r.fiscal_quarter.label();
        j["release_date"] = format_date(r.release_date);
        j["statements"] = r.statements;
        out << j.dump() << '\n';
    }
}

TradingCalendar::TradingCalendar(std::vector<TradingWeek> weeks) : weeks_(std::move(weeks)) {
    for (std::size_t i = 0; i < weeks_.size(); ++i) {
        const auto& w = weeks_[i];
        if (w.index != static_cast<int>(i) + 1) throw std::invalid_argument("week indices not contiguous");
        if (w.trading_days.empty()) throw std::invalid_argument("empty trading week");
        if (!std::is_sorted(w.trading_days.begin(), w.trading_days.end()) ||
            std::adjacent_find(w.trading_days.begin(), w.trading_days.end()) != w.trading_days.end())
            throw std::invalid_argument("trading days not strictly ascending");
        if (iso_week_start(w.first_day()) != iso_week_start(w.last_day()))
            throw std::invalid_argument("trading week spans two ISO weeks");
        if (i > 0 && !(weeks_[i - 1].last_day() < w.first_day()))
            throw std::invalid_argument("overlapping trading weeks");
    }
}

const TradingWeek& TradingCalendar::week(int t) const {
    if (t < 1 || t > static_cast<int>(weeks_.size()))
        throw std::out_of_range(fmt::format("week {} outside calendar 1..{}", t, weeks_.size()));
    return weeks_[static_cast<std::size_t>(t - 1)];
}

std::optional<int> TradingCalendar::week_of(Date d) const {
    const Date monday = iso_week_start(d);
    auto it = std::lower_bound(weeks_.begin(), weeks_.end(), monday,
                               [](const TradingWeek& w, Date m) { return w.iso_monday() < m; });
    if (it == weeks_.end() || it->iso_monday() != monday) return std::nullopt;
    return it->index;
}

TradingCalendar build_trading_calendar(const std::vector<DailyBar>& bars, std::optional<DateRange> range) {
    if (bars.empty()) throw std::invalid_argument("cannot build a trading calendar from an empty bar set");
    std::set<Date> days;
    for (const auto& b : bars)
        if (!range || range->contains(b.date)) days.insert(b.date);
    if (days.empty()) throw std::invalid_argument("no bars fall inside the requested date range");

    std::vector<TradingWeek> weeks;
    for (Date d : days) {
        if (weeks.empty() || weeks.back().iso_monday() != iso_week_start(d)) {
            TradingWeek w;
            w.index = static_cast<int>(weeks.size()) + 1;
            weeks.push_back(std::move(w));
        }
        weeks.back().trading_days.push_back(d);
    }
    return TradingCalendar(std::move(weeks));
}

std::vector<TradingWeek> week_slice(const TradingCalendar& calendar, int t, int lookback) {
    if (lookback < 1) throw std::invalid_argument("lookback must be >= 1");
    if (t - lookback < 1)
        throw WarmupError(lookback + 1, fmt::format("week {} needs {} prior weeks; first valid week is {}", t,
                                                    lookback, lookback + 1));
    if (t > static_cast<int>(calendar.size()) + 1)
        throw std::out_of_range(fmt::format("week {} beyond calendar", t));
    std::vector<TradingWeek> out;
    for (int k = t - lookback; k < t; ++k) out.push_back(calendar.week(k));
    return out;
}

BarStore::BarStore(std::vector<DailyBar> bars) : bars_(std::move(bars)) {
    sort_and_check_bars(bars_);
    for (const auto& b : bars_) by_stock_[b.stock].push_back(b);
}

std::vector<StockId> BarStore::symbols() const {
    std::vector<StockId> out;
    for (const auto& [s, _] : by_stock_) out.push_back(s);
    return out;
}

const std::vector<DailyBar>& BarStore::series(const StockId& stock) const {
    static const std::vector<DailyBar> empty;
    auto it = by_stock_.find(stock);
    return it == by_stock_.end() ? empty : it->second;
}

const DailyBar* BarStore::find(const StockId& stock, Date date) const {
    const auto& s = series(stock);
    auto it = std::lower_bound(s.begin(), s.end(), date, [](const DailyBar& b, Date d) { return b.date < d; });
    return (it != s.end() && it->date == date) ? &*it : nullptr;
}

std::vector<StockId> BarStore::tradable(const TradingWeek& week, const std::vector<StockId>& universe) const {
    std::vector<StockId> out;
    for (const auto& s : universe)
        if (find(s, week.first_day()) && find(s, week.last_day())) out.push_back(s);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace tristrat
