#pragma once

#include <cstddef>
#include <deque>
#include <string>

namespace tristrat {

inline constexpr std::size_t kDefaultHistoryCapacity = 10;

struct StrategyRecord {
    int week = 0;
    std::string strategy_text;
    double universe_avg_return = 0.0;
    double portfolio_return = 0.0;

    friend bool operator==(const StrategyRecord&, const StrategyRecord&) = default;
};

/// Last K strategies with their outcomes, oldest first. Strict FIFO eviction.
class StrategyHistory {
public:
    explicit StrategyHistory(std::size_t capacity = kDefaultHistoryCapacity);

    /// Throws std::invalid_argument unless `record.week` exceeds the newest week.
    void append(StrategyRecord record);

    const std::deque<StrategyRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    bool empty() const noexcept { return records_.empty(); }

    std::string render() const;

private:
    std::size_t capacity_;
    std::deque<StrategyRecord> records_;
};

/// Signed percentage with two decimals, e.g. 0.01 -> "+1.00%".
std::string format_signed_percent(double fraction);

} // namespace tristrat
