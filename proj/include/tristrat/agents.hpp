#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tristrat/backtest.hpp"
#include "tristrat/chat.hpp"
#include "tristrat/context.hpp"
#include "tristrat/portfolio.hpp"
#include "tristrat/strategy_history.hpp"

namespace tristrat {

inline constexpr const char* kInitialStrategy =
    "Weigh all six dimensions equally; prefer high Financial Health, Growth Potential, News Sentiment, News Impact, "
    "and Price Momentum; prefer low Volatility Risk.";

enum class AnalysisKind { News, Tech, Fund };

const char* to_string(AnalysisKind kind);

struct AnalysisReport {
    StockId stock;
    int week = 0;
    AnalysisKind kind = AnalysisKind::News;
    std::string text;
};

struct ScoreReport {
    StockId stock;
    int week = 0;
    int financial_health = 0;
    int growth_potential = 0;
    int news_sentiment = 0;
    int news_impact = 0;
    int price_momentum = 0;
    int volatility_risk = 0;
    std::string rationale;

    /// Block embedded verbatim in selector and strategy prompts.
    std::string to_text() const;
    nlohmann::json to_json() const;
    static ScoreReport from_json(const nlohmann::json& j);
};

inline constexpr const char* kScoreDimensions[] = {"financial_health", "growth_potential", "news_sentiment",
                                                    "news_impact",      "price_momentum",   "volatility_risk"};

struct Strategy {
    int week = 0;
    std::string text;
};

/// `{{name}}` placeholders in `system` and `user`; rendering an unbound
/// placeholder throws std::invalid_argument.
struct PromptTemplate {
    std::string role;
    std::string system;
    std::string user;

    std::vector<ChatMessage> render(const std::map<std::string, std::string>& bindings) const;
};

std::string render_placeholders(const std::string& text, const std::map<std::string, std::string>& bindings);

struct PromptTemplates {
    PromptTemplate news;
    PromptTemplate tech;
    PromptTemplate fund;
    PromptTemplate score;
    PromptTemplate select;
    PromptTemplate strategy;

    static PromptTemplates defaults();
    const PromptTemplate& for_kind(AnalysisKind kind) const;
};

/// First JSON object in `text`: a fenced ```json block if one parses, else
/// the first balanced `{...}` that parses.
std::optional<nlohmann::json> extract_json_object(const std::string& text);

/// Parses and range-checks a score reply. Returns the violation on failure.
struct ScoreParse {
    std::optional<ScoreReport> report;
    std::string error;
};
ScoreParse parse_score_reply(const std::string& text, const StockId& stock, int week);

/// Weight map from a selector reply. `malformed` means nothing usable was
/// found; unknown tickers are reported separately since repair cannot fix them.
struct WeightParse {
    std::map<std::string, double> weights;
    bool malformed = false;
    std::vector<std::string> unknown;
    std::string error;
};
WeightParse parse_weight_reply(const std::string& text, const std::vector<StockId>& tradable);

/// Agent call as recorded in the ledger.
struct CallRecord {
    std::string role;
    std::string stock;
    int week = 0;
    int attempt = 1;
    std::string cache_key;
    std::string prompt;
    std::string response;
};

nlohmann::json to_json(const CallRecord& c);

class AgentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AgentSettings {
    std::string model = "gpt-4o";
    double temperature = 0.0;
    int max_tokens = 1024;
    std::size_t max_positions = 5;
};

struct SelectionOutcome {
    Portfolio portfolio;
    std::vector<std::string> flags;
};

struct RefineOutcome {
    Strategy strategy;
    bool carried_forward = false;
    std::string flag;
};

/// The six agent roles over one chat client. Each call appends its
/// CallRecords to the caller's log.
class Agents {
public:
    Agents(ChatClient& client, AgentSettings settings = {}, PromptTemplates templates = PromptTemplates::defaults());

    AnalysisReport analyze(AnalysisKind kind, const std::string& input_text, const StockId& stock, int week,
                           std::vector<CallRecord>& log) const;

    /// One corrective re-prompt on a bad reply, then AgentError.
    ScoreReport score(const DataOverview& overview, std::vector<CallRecord>& log) const;

    /// One corrective re-prompt on a violation, then deterministic repair.
    /// Throws AgentError for unknown tickers or unparseable replies.
    SelectionOutcome select(const std::vector<ScoreReport>& scores, const Strategy& strategy,
                            const std::vector<StockId>& tradable, std::vector<CallRecord>& log) const;

    /// Empty replies or provider failures carry `current` forward. Cache misses
    /// and credential rejections propagate.
    RefineOutcome refine(const Strategy& current, const Portfolio& portfolio, const ReturnVector& returns,
                         const std::vector<ScoreReport>& scores, const StrategyHistory& history,
                         std::vector<CallRecord>& log) const;

    const AgentSettings& settings() const noexcept { return settings_; }
    const PromptTemplates& templates() const noexcept { return templates_; }

private:
    ChatResponse call(const CallTag& tag, std::vector<ChatMessage> messages, int attempt, std::vector<CallRecord>& log) const;

    ChatClient& client_;
    AgentSettings settings_;
    PromptTemplates templates_;
};

/// Selector prompt data section; every report appears verbatim.
std::string render_score_table(const std::vector<ScoreReport>& scores);
/// Per-stock six scores, weight and realized return, ticker order.
std::string render_score_return_table(const std::vector<ScoreReport>& scores, const Portfolio& portfolio,
                                      const ReturnVector& returns);

} // namespace tristrat
