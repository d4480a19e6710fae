#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tristrat/agents.hpp"
#include "tristrat/backtest.hpp"
#include "tristrat/baselines.hpp"
#include "tristrat/chat.hpp"
#include "tristrat/config.hpp"
#include "tristrat/metrics.hpp"
#include "tristrat/strategy_history.hpp"

namespace tristrat {

inline constexpr int kLedgerSchemaVersion = 1;

struct MarketDataSet {
    BarStore bars;
    std::vector<NewsItem> news;
    std::vector<FundamentalReport> fundamentals;
};

/// Reads bars.csv, news.jsonl and fundamentals.jsonl from a data store
/// directory. Missing news or fundamentals files load as empty.
MarketDataSet load_data_store(const std::filesystem::path& dir);

/// Append-only JSONL ledger. Every line is flushed as it is written.
class Ledger {
public:
    Ledger() = default;
    /// Truncates `path`.
    static Ledger create(const std::filesystem::path& path);
    /// Opens for appending after dropping any incomplete trailing line.
    static Ledger reopen(const std::filesystem::path& path);

    void append(const nlohmann::json& record);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::shared_ptr<std::ofstream> out_;
};

struct LedgerContents {
    std::optional<nlohmann::json> header;
    std::vector<nlohmann::json> weeks;
};

/// Parses complete lines only; a torn final line is ignored.
LedgerContents read_ledger(const std::filesystem::path& path);

struct RunState {
    int next_week = 0; // calendar index of the next week to run
    Strategy strategy;
    StrategyHistory history;
    EquityCurve equity;
    Ledger ledger;
};

struct WeekOutcome {
    int week = 0;
    std::vector<StockId> tradable;
    Portfolio portfolio;
    std::vector<ScoreReport> scores;
    std::vector<CallRecord> calls;
    std::vector<std::string> flags;
};

/// One run (agents or a single baseline) over a shared calendar.
class Pipeline {
public:
    /// `client` is needed to run agent weeks and ignored for baselines.
    Pipeline(RunConfig config, const MarketDataSet& data, ChatClient* client = nullptr);

    const TradingCalendar& calendar() const noexcept { return calendar_; }
    /// Calendar indices evaluated by this run, ascending.
    const std::vector<int>& evaluation_weeks() const noexcept { return evaluation_weeks_; }
    const std::vector<StockId>& universe() const noexcept { return universe_; }
    const RunConfig& config() const noexcept { return config_; }

    nlohmann::json ledger_header() const;
    RunState initial_state(Ledger ledger) const;
    /// Rebuilds state from a ledger's completed weeks.
    RunState resume_state(const LedgerContents& contents, Ledger ledger) const;

    /// Scoring and selection for week t. Agent failures degrade the week to
    /// cash; replay cache misses and credential rejections propagate.
    WeekOutcome run_week(const RunState& state, int t) const;
    /// Settlement, history update, strategy refinement, ledger record.
    void settle_and_refine(RunState& state, WeekOutcome outcome) const;

private:
    Portfolio baseline_portfolio(int t, const std::vector<StockId>& tradable) const;
    const std::vector<IndicatorRow>& rows_for(const StockId& stock) const;

    RunConfig config_;
    const MarketDataSet& data_;
    ChatClient* client_;
    std::optional<Agents> agents_;
    TradingCalendar calendar_;
    std::vector<StockId> universe_;
    std::vector<int> evaluation_weeks_;
    std::map<StockId, std::vector<IndicatorRow>> indicator_rows_;
};

/// Selector call plus enforcement. The result either satisfies every
/// portfolio invariant or is all cash with an "all_cash" flag appended.
Portfolio select_portfolio(const Agents& agents, const std::vector<ScoreReport>& scores, const Strategy& strategy,
                           const std::vector<StockId>& tradable, std::size_t max_positions,
                           std::vector<CallRecord>& calls, std::vector<std::string>& flags);

struct RunSummary {
    std::string name;
    MetricsReport metrics;
    EquityCurve equity;
    std::vector<int> weeks;
    std::vector<Date> week_end_dates;
    std::filesystem::path ledger_path;
};

struct BacktestOutput {
    RunSummary primary;
    std::vector<RunSummary> baselines;
    bool completed = true;
    long network_calls = 0;
    long cache_hits = 0;
};

struct BacktestOptions {
    bool resume = false;
    /// Stop after this many newly settled weeks without writing reports.
    std::optional<int> stop_after_weeks;
};

/// Builds the provider the config asks for. Throws ConfigError when a live
/// provider has no credential.
std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

/// Full run: writes ledger.jsonl, equity.csv and report.json under
/// config.output_dir. `provider` overrides make_provider in agent mode.
BacktestOutput run_backtest(const RunConfig& config, std::shared_ptr<Provider> provider = nullptr,
                            const BacktestOptions& options = {});

/// Metrics from a ledger's week records.
RunSummary summarize_ledger(const std::filesystem::path& path);

nlohmann::json metrics_to_json(const MetricsReport& m);
std::string format_report_table(const std::vector<RunSummary>& runs);

} // namespace tristrat
