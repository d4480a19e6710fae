#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tristrat/agents.hpp"
#include "tristrat/context.hpp"
#include "tristrat/indicators.hpp"
#include "tristrat/market_data.hpp"

namespace tristrat {

// Minimal TOML reader for run configs: [tables], bare or dotted-free keys,
// basic strings, integers, floats, booleans and single-line arrays.

using TomlScalar = std::variant<std::string, long long, double, bool>;
using TomlValue = std::variant<std::string, long long, double, bool, std::vector<TomlScalar>>;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Keys are flattened to "table.key".
std::map<std::string, TomlValue> parse_toml(const std::string& text);

enum class RunMode { Agents, Baseline };

struct ProviderConfig {
    std::string kind = "openai"; // openai | stub
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "TRISTRAT_API_KEY";
    std::optional<std::filesystem::path> stub_script;
    int timeout_ms = 60000;
    int max_attempts = 3;
    int backoff_ms = 200;
    int max_in_flight = 4;
    double requests_per_second = 0.0;
    std::optional<std::filesystem::path> cache_dir;
    bool replay = false;
};

struct RunConfig {
    std::filesystem::path data_dir;
    std::vector<StockId> universe; // empty: every symbol in the bar file
    std::optional<Date> start;
    std::optional<Date> end;

    RunMode mode = RunMode::Baseline;
    std::string baseline = "1n";               // 1n | sma | macd | boll
    std::vector<std::string> compare_baselines; // run alongside on the same calendar
    std::filesystem::path output_dir = "out";

    std::size_t history_capacity = 10;
    ContextConfig context;
    IndicatorParams indicators;
    AgentSettings agents;
    ProviderConfig provider;

    /// Throws ConfigError on invariant violations.
    void validate() const;
    /// Name used in reports and ledgers: "agents" or "baseline:<name>".
    std::string run_name() const;

    static RunConfig from_toml(const std::string& text, const std::filesystem::path& base_dir = ".");
    static RunConfig load(const std::filesystem::path& path);
};

bool is_known_baseline(const std::string& name);

} // namespace tristrat
