#include "tristrat/agents.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace tristrat {

using json = nlohmann::json;

const char* to_string(AnalysisKind kind) {
    switch (kind) {
        case AnalysisKind::News: return "news";
        case AnalysisKind::Tech: return "tech";
        case AnalysisKind::Fund: return "fund";
    }
    return "news";
}

std::string ScoreReport::to_text() const {
    return fmt::format("### {}\nfinancial_health: {}\ngrowth_potential: {}\nnews_sentiment: {}\nnews_impact: {}\n"
                       "price_momentum: {}\nvolatility_risk: {}\nrationale: {}",
                       stock.str(), financial_health, growth_potential, news_sentiment, news_impact, price_momentum,
                       volatility_risk, rationale);
}

json ScoreReport::to_json() const {
    return {{"stock", stock.str()},
            {"week", week},
            {"financial_health", financial_health},
            {"growth_potential", growth_potential},
            {"news_sentiment", news_sentiment},
            {"news_impact", news_impact},
            {"price_momentum", price_momentum},
            {"volatility_risk", volatility_risk},
            {"rationale", rationale}};
}

ScoreReport ScoreReport::from_json(const json& j) {
    ScoreReport r;
    r.stock = StockId(j.at("stock").get<std::string>());
    r.week = j.at("week").get<int>();
    r.financial_health = j.at("financial_health").get<int>();
    r.growth_potential = j.at("growth_potential").get<int>();
    r.news_sentiment = j.at("news_sentiment").get<int>();
    r.news_impact = j.at("news_impact").get<int>();
    r.price_momentum = j.at("price_momentum").get<int>();
    r.volatility_risk = j.at("volatility_risk").get<int>();
    r.rationale = j.at("rationale").get<std::string>();
    return r;
}

std::string render_placeholders(const std::string& text, const std::map<std::string, std::string>& bindings) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find("{{", pos);
        if (open == std::string::npos) break;
        const auto close = text.find("}}", open + 2);
        if (close == std::string::npos) break;
        const std::string name = text.substr(open + 2, close - open - 2);
        auto it = bindings.find(name);
        if (it == bindings.end()) throw std::invalid_argument(fmt::format("unbound prompt placeholder '{}'", name));
        out.append(text, pos, open - pos);
        out += it->second;
        pos = close + 2;
    }
    out.append(text, pos, std::string::npos);
    return out;
}

std::vector<ChatMessage> PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
    return {{"system", render_placeholders(system, bindings)}, {"user", render_placeholders(user, bindings)}};
}

namespace {

std::optional<json> parse_object(std::string_view text) {
    try {
        auto j = json::parse(text);
        if (j.is_object()) return j;
    } catch (const json::exception&) {
    }
    return std::nullopt;
}

/// End index (exclusive) of the balanced object starting at `open`.
std::optional<std::size_t> balanced_end(const std::string& text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i + 1;
    }
    return std::nullopt;
}

} // namespace

std::optional<json> extract_json_object(const std::string& text) {
    std::size_t pos = 0;
    while ((pos = text.find("```", pos)) != std::string::npos) {
        auto body_start = text.find('\n', pos + 3);
        if (body_start == std::string::npos) break;
        const auto fence_end = text.find("```", body_start);
        if (fence_end == std::string::npos) break;
        if (auto j = parse_object(std::string_view(text).substr(body_start + 1, fence_end - body_start - 1))) return j;
        pos = fence_end + 3;
    }
    for (pos = text.find('{'); pos != std::string::npos; pos = text.find('{', pos + 1)) {
        if (auto end = balanced_end(text, pos))
            if (auto j = parse_object(std::string_view(text).substr(pos, *end - pos))) return j;
    }
    return std::nullopt;
}

ScoreParse parse_score_reply(const std::string& text, const StockId& stock, int week) {
    auto j = extract_json_object(text);
    if (!j) return {std::nullopt, "no JSON object found in the reply"};

    int values[6] = {};
    for (int d = 0; d < 6; ++d) {
        const char* name = kScoreDimensions[d];
        if (!j->contains(name)) return {std::nullopt, fmt::format("missing dimension '{}'", name)};
        const auto& v = (*j)[name];
        if (!v.is_number_integer())
            return {std::nullopt, fmt::format("'{}' must be an integer, got {}", name, v.dump())};
        const auto n = v.get<long long>();
        if (n < 1 || n > 10) return {std::nullopt, fmt::format("'{}' is {}, outside 1..10", name, n)};
        values[d] = static_cast<int>(n);
    }
    ScoreReport r;
    r.stock = stock;
    r.week = week;
    r.financial_health = values[0];
    r.growth_potential = values[1];
    r.news_sentiment = values[2];
    r.news_impact = values[3];
    r.price_momentum = values[4];
    r.volatility_risk = values[5];
    if (j->contains("rationale") && (*j)["rationale"].is_string()) r.rationale = (*j)["rationale"].get<std::string>();
    return {r, {}};
}

WeightParse parse_weight_reply(const std::string& text, const std::vector<StockId>& tradable) {
    WeightParse out;
    auto j = extract_json_object(text);
    if (!j) {
        out.malformed = true;
        out.error = "no JSON object found in the reply";
        return out;
    }
    const json* map = &*j;
    if (j->contains("weights") && (*j)["weights"].is_object()) map = &(*j)["weights"];
    for (const auto& [key, value] : map->items()) {
        if (!value.is_number()) {
            out.malformed = true;
            out.error = fmt::format("weight for '{}' is not a number", key);
            return out;
        }
        const bool known = std::any_of(tradable.begin(), tradable.end(), [&](const StockId& s) { return s.str() == key; });
        if (!known) out.unknown.push_back(key);
        else out.weights[key] = value.get<double>();
    }
    if (!out.unknown.empty()) {
        std::string names;
        for (const auto& u : out.unknown) names += (names.empty() ? "" : ", ") + u;
        out.error = fmt::format("unknown tickers: {}", names);
    }
    return out;
}

json to_json(const CallRecord& c) {
    return {{"role", c.role},         {"stock", c.stock},   {"week", c.week},        {"attempt", c.attempt},
            {"cache_key", c.cache_key}, {"prompt", c.prompt}, {"response", c.response}};
}

std::string render_score_table(const std::vector<ScoreReport>& scores) {
    std::string out;
    for (const auto& s : scores) {
        if (!out.empty()) out += "\n\n";
        out += s.to_text();
    }
    return out.empty() ? std::string("(no scored candidates)") : out;
}

std::string render_score_return_table(const std::vector<ScoreReport>& scores, const Portfolio& portfolio,
                                      const ReturnVector& returns) {
    std::string out = "ticker | financial_health | growth_potential | news_sentiment | news_impact | price_momentum | "
                      "volatility_risk | weight | weekly_return";
    for (const auto& [stock, r] : returns.returns) {
        auto it = std::find_if(scores.begin(), scores.end(), [&](const ScoreReport& s) { return s.stock == stock; });
        std::string cells = it == scores.end()
                                ? std::string("- | - | - | - | - | -")
                                : fmt::format("{} | {} | {} | {} | {} | {}", it->financial_health, it->growth_potential,
                                              it->news_sentiment, it->news_impact, it->price_momentum,
                                              it->volatility_risk);
        auto w = portfolio.weights.find(stock);
        out += fmt::format("\n{} | {} | {:.2f}% | {}", stock.str(), cells,
                           w == portfolio.weights.end() ? 0.0 : w->second * 100.0, format_signed_percent(r));
    }
    return out;
}

Agents::Agents(ChatClient& client, AgentSettings settings, PromptTemplates templates)
    : client_(client), settings_(std::move(settings)), templates_(std::move(templates)) {}

ChatResponse Agents::call(const CallTag& tag, std::vector<ChatMessage> messages, int attempt,
                          std::vector<CallRecord>& log) const {
    ChatRequest request;
    request.model = settings_.model;
    request.messages = std::move(messages);
    request.temperature = settings_.temperature;
    request.max_tokens = settings_.max_tokens;
    request.tag = tag;
    auto response = client_.complete(request);
    log.push_back({tag.role, tag.stock, tag.week, attempt, response.cache_key, request.rendered_prompt(),
                   response.content});
    return response;
}

AnalysisReport Agents::analyze(AnalysisKind kind, const std::string& input_text, const StockId& stock, int week,
                               std::vector<CallRecord>& log) const {
    const auto& tmpl = templates_.for_kind(kind);
    auto messages = tmpl.render({{"stock", stock.str()}, {"week", std::to_string(week)}, {"input", input_text}});
    auto response = call({to_string(kind), stock.str(), week}, std::move(messages), 1, log);
    if (response.content.find_first_not_of(" \t\r\n") == std::string::npos)
        throw AgentError(fmt::format("{} agent returned an empty report for {} week {}", to_string(kind), stock.str(),
                                     week));
    return {stock, week, kind, response.content};
}

ScoreReport Agents::score(const DataOverview& overview, std::vector<CallRecord>& log) const {
    const CallTag tag{"score", overview.stock.str(), overview.week};
    auto messages = templates_.score.render(
        {{"stock", overview.stock.str()}, {"week", std::to_string(overview.week)}, {"overview", overview.text}});

    auto first = call(tag, messages, 1, log);
    auto parsed = parse_score_reply(first.content, overview.stock, overview.week);
    if (parsed.report) return *parsed.report;

    messages.push_back({"assistant", first.content});
    messages.push_back({"user", fmt::format("Your reply was rejected: {}. Reply again with only the ```json block "
                                            "holding all six integer scores from 1 to 10 and the rationale.",
                                            parsed.error)});
    auto second = call(tag, std::move(messages), 2, log);
    parsed = parse_score_reply(second.content, overview.stock, overview.week);
    if (parsed.report) return *parsed.report;
    throw AgentError(fmt::format("score agent failed for {} week {}: {}", overview.stock.str(), overview.week,
                                 parsed.error));
}

SelectionOutcome Agents::select(const std::vector<ScoreReport>& scores, const Strategy& strategy,
                                const std::vector<StockId>& tradable, std::vector<CallRecord>& log) const {
    const CallTag tag{"select", "", strategy.week};
    std::string candidates;
    for (const auto& s : tradable) candidates += (candidates.empty() ? "" : ", ") + s.str();
    auto messages = templates_.select.render({{"week", std::to_string(strategy.week)},
                                              {"strategy", strategy.text},
                                              {"candidates", candidates},
                                              {"max_positions", std::to_string(settings_.max_positions)},
                                              {"scores", render_score_table(scores)}});

    auto to_portfolio = [&](const WeightParse& parse) {
        Portfolio p{strategy.week, {}};
        for (const auto& [ticker, w] : parse.weights)
            if (w != 0.0) p.weights[StockId(ticker)] = w;
        return p;
    };

    auto first = call(tag, messages, 1, log);
    auto parsed = parse_weight_reply(first.content, tradable);
    std::string problem = parsed.error;
    if (!parsed.malformed && parsed.unknown.empty()) {
        auto p = to_portfolio(parsed);
        auto violation = portfolio_violation(p, tradable, settings_.max_positions);
        if (!violation) return {p, {}};
        problem = *violation;
    }

    messages.push_back({"assistant", first.content});
    messages.push_back({"user", fmt::format("Your allocation was rejected: {}. Reply again with only the ```json "
                                            "block mapping candidate tickers to weights in [0,1], at most {} "
                                            "nonzero, summing to at most 1.",
                                            problem, settings_.max_positions)});
    auto second = call(tag, std::move(messages), 2, log);
    parsed = parse_weight_reply(second.content, tradable);
    if (parsed.malformed || !parsed.unknown.empty())
        throw AgentError(fmt::format("selector failed for week {}: {}", strategy.week, parsed.error));

    auto p = to_portfolio(parsed);
    auto violation = portfolio_violation(p, tradable, settings_.max_positions);
    if (!violation) return {p, {fmt::format("select_corrected: {}", problem)}};
    auto repaired = repair_portfolio(p, settings_.max_positions);
    return {repaired, {fmt::format("select_repaired: {}", *violation)}};
}

RefineOutcome Agents::refine(const Strategy& current, const Portfolio& portfolio, const ReturnVector& returns,
                             const std::vector<ScoreReport>& scores, const StrategyHistory& history,
                             std::vector<CallRecord>& log) const {
    std::string holdings;
    for (const auto& [stock, w] : portfolio.weights)
        holdings += fmt::format("{}{}: {:.2f}%", holdings.empty() ? "" : ", ", stock.str(), w * 100.0);
    holdings += fmt::format("{}cash: {:.2f}%", holdings.empty() ? "" : ", ", portfolio.cash_fraction() * 100.0);

    auto messages = templates_.strategy.render({{"week", std::to_string(current.week)},
                                                {"next_week", std::to_string(current.week + 1)},
                                                {"strategy", current.text},
                                                {"portfolio", holdings},
                                                {"table", render_score_return_table(scores, portfolio, returns)},
                                                {"history", history.render()},
                                                {"history_capacity", std::to_string(history.capacity())}});
    const Strategy carried{current.week + 1, current.text};
    try {
        auto response = call({"strategy", "", current.week}, std::move(messages), 1, log);
        const auto first = response.content.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) return {carried, true, "strategy_carried_forward: empty strategy reply"};
        const auto last = response.content.find_last_not_of(" \t\r\n");
        return {{current.week + 1, response.content.substr(first, last - first + 1)}, false, {}};
    } catch (const CacheMissError&) {
        throw;
    } catch (const AuthError&) {
        throw;
    } catch (const ProviderError& e) {
        return {carried, true, fmt::format("strategy_carried_forward: {}", e.what())};
    }
}

} // namespace tristrat
