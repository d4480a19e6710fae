#include "tristrat/context.hpp"

#include <algorithm>
#include <tuple>

#include <fmt/format.h>

namespace tristrat {

namespace {

void append_field(std::string& line, const char* name, const std::optional<double>& value) {
    if (value) line += fmt::format(" {}={:.4f}", name, *value);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace

std::string truncate_oldest(const std::string& text, std::size_t max_chars) {
    if (text.size() <= max_chars) return text;
    auto lines = split_lines(text);
    if (lines.size() < 2) return text.substr(text.size() - max_chars);

    const std::string& header = lines.front();
    std::size_t first = 1;
    auto assemble = [&](std::size_t from) {
        std::string out = header;
        out += fmt::format("\n({} older lines truncated)", from - 1);
        for (std::size_t i = from; i < lines.size(); ++i) out += '\n' + lines[i];
        return out;
    };
    std::string out = assemble(first);
    while (out.size() > max_chars && first + 1 < lines.size()) out = assemble(++first);
    return out;
}

std::string build_tech_input(const StockId& stock, int t, const TradingCalendar& calendar,
                             const std::vector<IndicatorRow>& rows, const ContextConfig& config) {
    const auto weeks = week_slice(calendar, t, config.tech_lookback_weeks);
    const Date from = weeks.front().first_day();
    const Date to = weeks.back().last_day();

    std::string text = fmt::format("Technical data for {} over weeks {}-{} ({} to {}):", stock.str(),
                                   weeks.front().index, weeks.back().index, format_date(from), format_date(to));
    auto it = std::lower_bound(rows.begin(), rows.end(), from,
                               [](const IndicatorRow& r, Date d) { return r.date < d; });
    for (; it != rows.end() && it->date <= to; ++it) {
        std::string line = fmt::format("{} close={:.2f}", format_date(it->date), it->close);
        append_field(line, "sma", it->sma);
        append_field(line, "atr", it->atr);
        append_field(line, "rsi", it->rsi);
        append_field(line, "macd", it->macd_line);
        append_field(line, "macd_signal", it->macd_signal);
        append_field(line, "macd_hist", it->macd_hist);
        append_field(line, "boll_upper", it->boll_upper);
        append_field(line, "boll_mid", it->boll_mid);
        append_field(line, "boll_lower", it->boll_lower);
        text += '\n' + line;
    }
    return truncate_oldest(text, config.max_section_chars);
}

std::string build_news_input(const StockId& stock, int t, const TradingCalendar& calendar,
                             const std::vector<NewsItem>& news, const ContextConfig& config) {
    const auto weeks = week_slice(calendar, t, config.news_lookback_weeks);
    const Date from = weeks.front().iso_monday();
    const Date to = weeks.back().iso_sunday();

    std::vector<const NewsItem*> picked;
    for (const auto& n : news)
        if (n.stock == stock && from <= n.date && n.date <= to) picked.push_back(&n);
    if (picked.empty()) return kNoNewsSentinel;

    std::sort(picked.begin(), picked.end(), [](const NewsItem* a, const NewsItem* b) {
        return std::tie(a->date, a->title, a->summary) < std::tie(b->date, b->title, b->summary);
    });
    std::string text = fmt::format("News for {} from {} to {}:", stock.str(), format_date(from), format_date(to));
    for (const auto* n : picked)
        text += fmt::format("\n[{}] {}: {}", format_date(n->date), n->title, n->summary);
    return truncate_oldest(text, config.max_section_chars);
}

std::string build_fund_input(const StockId& stock, int t, const TradingCalendar& calendar,
                             const std::vector<FundamentalReport>& fundamentals, const ContextConfig& config) {
    const Date cutoff = calendar.week(t).first_day();
    std::vector<const FundamentalReport*> released;
    for (const auto& f : fundamentals)
        if (f.stock == stock && f.release_date < cutoff) released.push_back(&f);
    if (released.empty()) return kNoFundamentalsSentinel;

    std::sort(released.begin(), released.end(),
              [](const auto* a, const auto* b) { return a->fiscal_quarter < b->fiscal_quarter; });
    if (released.size() > config.max_fundamental_quarters)
        released.erase(released.begin(), released.end() - static_cast<std::ptrdiff_t>(config.max_fundamental_quarters));

    std::string text = fmt::format("Fundamentals for {} ({} most recent quarters, oldest first):", stock.str(),
                                   released.size());
    for (const auto* f : released) {
        text += fmt::format("\n### {} (released {})", f->fiscal_quarter.label(), format_date(f->release_date));
        for (const auto& [key, value] : f->statements) text += fmt::format("\n{}: {}", key, format_number(value));
    }
    return truncate_oldest(text, config.max_section_chars);
}

DataOverview build_overview(const StockId& stock, int week, const std::string& news_analysis,
                            const std::string& tech_analysis, const std::string& fund_analysis) {
    auto body = [](const std::string& s) { return s.empty() ? std::string("(empty report)") : s; };
    DataOverview o;
    o.stock = stock;
    o.week = week;
    o.text = fmt::format("## NEWS ANALYSIS\n{}\n\n## TECHNICAL ANALYSIS\n{}\n\n## FUNDAMENTAL ANALYSIS\n{}",
                         body(news_analysis), body(tech_analysis), body(fund_analysis));
    return o;
}

} // namespace tristrat
