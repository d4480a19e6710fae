#include "tristrat/strategy_history.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace tristrat {

StrategyHistory::StrategyHistory(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("history capacity must be >= 1");
}

void StrategyHistory::append(StrategyRecord record) {
    if (!std::isfinite(record.universe_avg_return) || !std::isfinite(record.portfolio_return))
        throw std::invalid_argument("strategy record returns must be finite");
    if (!records_.empty() && record.week <= records_.back().week)
        throw std::invalid_argument(
            fmt::format("history week {} does not follow week {}", record.week, records_.back().week));
    records_.push_back(std::move(record));
    while (records_.size() > capacity_) records_.pop_front();
}

std::string StrategyHistory::render() const {
    if (records_.empty()) return "NO PRIOR STRATEGIES";
    std::string out;
    for (const auto& r : records_) {
        if (!out.empty()) out += '\n';
        out += fmt::format("### Week {}\nStrategy: {}\nUniverse average return: {}\nPortfolio return: {}\n", r.week,
                           r.strategy_text, format_signed_percent(r.universe_avg_return),
                           format_signed_percent(r.portfolio_return));
    }
    return out;
}

std::string format_signed_percent(double fraction) {
    const double pct = fraction * 100.0;
    // Keep "-0.00%" out of the text.
    if (std::abs(pct) < 0.005) return "+0.00%";
    return fmt::format("{:+.2f}%", pct);
}

} // namespace tristrat
