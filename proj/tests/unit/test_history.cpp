#include <doctest.h>

#include <cmath>

#include <fmt/format.h>

#include "tristrat/strategy_history.hpp"

using namespace tristrat;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

} // namespace

TEST_CASE("append and FIFO eviction") {
    StrategyHistory h;
    h.append({1, "s1", 0.0, 0.0});
    CHECK(h.size() == 1);
    for (int w = 2; w <= 10; ++w) h.append({w, "s", 0.0, 0.0});
    CHECK(h.size() == 10);
    h.append({11, "s11", 0.0, 0.0});
    CHECK(h.size() == 10);
    CHECK(h.records().front().week == 2);
    CHECK(h.records().back().week == 11);
    CHECK_THROWS(h.append({5, "late", 0, 0}));
    CHECK_THROWS(h.append({12, "nan", std::nan(""), 0}));
}

TEST_CASE("render") {
    StrategyHistory h;
    CHECK(h.render() == "NO PRIOR STRATEGIES");
    h.append({1, "x", 0.01, 0.02});
    const auto one = h.render();
    CHECK(one.find("+1.00%") != std::string::npos);
    CHECK(one.find("+2.00%") != std::string::npos);

    for (int w = 2; w <= 12; ++w) h.append({w, fmt::format("strategy {}", w), -0.01, 0.0});
    const auto text = h.render();
    CHECK(count(text, "### Week") == 10);
    CHECK(text.find("### Week 3") < text.find("### Week 12"));
    CHECK(text.find("### Week 2\n") == std::string::npos);
}

TEST_CASE("signed percent") {
    CHECK(format_signed_percent(0.01) == "+1.00%");
    CHECK(format_signed_percent(-0.0234) == "-2.34%");
    CHECK(format_signed_percent(-0.00001) == "+0.00%");
}
