#include "tristrat/pipeline.hpp"

#include <cstdlib>
#include <future>
#include <sstream>

#include <fmt/format.h>

#include "tristrat/stub_provider.hpp"

namespace tristrat {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
    return in;
}

json weights_json(const std::map<StockId, double>& weights) {
    json j = json::object();
    for (const auto& [s, w] : weights) j[s.str()] = w;
    return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << text;
}

std::string equity_csv(const RunSummary& run) {
    std::string out = "week,date,W_t,R_t\n";
    for (std::size_t i = 0; i < run.weeks.size(); ++i)
        out += fmt::format("{},{},{},{}\n", run.weeks[i], format_date(run.week_end_dates[i]),
                           format_number(run.equity.wealth()[i]), format_number(run.equity.returns()[i]));
    return out;
}

RunSummary summarize_contents(const LedgerContents& contents, const fs::path& path) {
    RunSummary s;
    s.ledger_path = path;
    s.name = contents.header ? contents.header->value("run", std::string("unknown")) : path.stem().string();
    std::vector<double> wealth, returns;
    for (const auto& w : contents.weeks) {
        s.weeks.push_back(w.at("week").get<int>());
        s.week_end_dates.push_back(parse_date(w.at("last_day").get<std::string>()));
        wealth.push_back(w.at("wealth").get<double>());
        returns.push_back(w.at("portfolio_return").get<double>());
    }
    s.metrics = compute_metrics(Eigen::Map<const Eigen::VectorXd>(returns.data(), static_cast<Eigen::Index>(returns.size())));
    s.equity.restore(std::move(wealth), std::move(returns));
    return s;
}

} // namespace

MarketDataSet load_data_store(const fs::path& dir) {
    MarketDataSet data;
    {
        auto in = open_input(dir / "bars.csv");
        data.bars = BarStore(load_daily_bars(in));
    }
    if (fs::exists(dir / "news.jsonl")) {
        auto in = open_input(dir / "news.jsonl");
        data.news = load_news(in);
    }
    if (fs::exists(dir / "fundamentals.jsonl")) {
        auto in = open_input(dir / "fundamentals.jsonl");
        data.fundamentals = load_fundamentals(in);
    }
    return data;
}

Ledger Ledger::create(const fs::path& path) {
    Ledger l;
    l.path_ = path;
    l.out_ = std::make_shared<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*l.out_) throw std::runtime_error(fmt::format("cannot create ledger '{}'", path.string()));
    return l;
}

Ledger Ledger::reopen(const fs::path& path) {
    std::string text;
    {
        auto in = open_input(path);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    const auto keep = text.rfind('\n');
    fs::resize_file(path, keep == std::string::npos ? 0 : keep + 1);
    Ledger l;
    l.path_ = path;
    l.out_ = std::make_shared<std::ofstream>(path, std::ios::binary | std::ios::app);
    if (!*l.out_) throw std::runtime_error(fmt::format("cannot reopen ledger '{}'", path.string()));
    return l;
}

void Ledger::append(const json& record) {
    if (!out_) throw std::logic_error("ledger is not open");
    *out_ << record.dump() << '\n';
    out_->flush();
}

LedgerContents read_ledger(const fs::path& path) {
    auto in = open_input(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    LedgerContents contents;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (true) {
        const auto end = text.find('\n', start);
        if (end == std::string::npos) break; // torn or empty tail
        ++line_no;
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(fmt::format("ledger {} line {}: {}", path.string(), line_no, e.what()));
        }
        const auto type = j.value("type", std::string{});
        if (type == "header") contents.header = j;
        else if (type == "week") contents.weeks.push_back(std::move(j));
    }
    return contents;
}

Pipeline::Pipeline(RunConfig config, const MarketDataSet& data, ChatClient* client)
    : config_(std::move(config)), data_(data), client_(client) {
    config_.validate();
    if (config_.mode == RunMode::Agents && client_) agents_.emplace(*client_, config_.agents);
    calendar_ = build_trading_calendar(data_.bars.all());

    universe_ = config_.universe.empty() ? data_.bars.symbols() : config_.universe;
    std::sort(universe_.begin(), universe_.end());
    if (std::adjacent_find(universe_.begin(), universe_.end()) != universe_.end())
        throw ConfigError("universe lists a ticker twice");
    for (const auto& s : universe_) {
        if (data_.bars.series(s).empty()) throw ConfigError(fmt::format("no bars for universe ticker {}", s.str()));
        indicator_rows_[s] = indicator_table(data_.bars.series(s), config_.indicators);
    }

    const Date data_first = calendar_.weeks().front().first_day();
    const Date data_last = calendar_.weeks().back().last_day();
    if (config_.start && *config_.start > data_last)
        throw ConfigError(fmt::format("start {} is after the last bar {}", format_date(*config_.start),
                                      format_date(data_last)));
    if (config_.end && *config_.end < data_first)
        throw ConfigError(fmt::format("end {} is before the first bar {}", format_date(*config_.end),
                                      format_date(data_first)));

    const int warmup = std::max(config_.context.tech_lookback_weeks, config_.context.news_lookback_weeks);
    for (const auto& w : calendar_.weeks()) {
        if (w.index <= warmup) continue;
        if (config_.start && w.first_day() < *config_.start) continue;
        if (config_.end && w.last_day() > *config_.end) continue;
        evaluation_weeks_.push_back(w.index);
    }
    if (evaluation_weeks_.empty())
        throw ConfigError(fmt::format("no evaluable weeks: data has {} weeks and the first {} are warm-up",
                                      calendar_.size(), warmup));
}

const std::vector<IndicatorRow>& Pipeline::rows_for(const StockId& stock) const { return indicator_rows_.at(stock); }

json Pipeline::ledger_header() const {
    json h;
    h["type"] = "header";
    h["schema_version"] = kLedgerSchemaVersion;
    h["run"] = config_.run_name();
    json universe = json::array();
    for (const auto& s : universe_) universe.push_back(s.str());
    h["universe"] = universe;
    h["first_week"] = evaluation_weeks_.front();
    h["last_week"] = evaluation_weeks_.back();
    h["max_positions"] = config_.agents.max_positions;
    if (config_.mode == RunMode::Agents) {
        h["model"] = config_.agents.model;
        h["temperature"] = config_.agents.temperature;
        h["max_tokens"] = config_.agents.max_tokens;
        h["history_capacity"] = config_.history_capacity;
        h["lookback_weeks"] = config_.context.tech_lookback_weeks;
        h["news_lookback_weeks"] = config_.context.news_lookback_weeks;
        h["initial_strategy"] = kInitialStrategy;
    }
    return h;
}

RunState Pipeline::initial_state(Ledger ledger) const {
    RunState s{evaluation_weeks_.front(), {evaluation_weeks_.front(), kInitialStrategy},
               StrategyHistory(config_.history_capacity), {}, std::move(ledger)};
    return s;
}

RunState Pipeline::resume_state(const LedgerContents& contents, Ledger ledger) const {
    if (!contents.header || contents.header->dump() != ledger_header().dump())
        throw std::runtime_error("ledger header does not match this configuration; refusing to resume");
    RunState s = initial_state(std::move(ledger));
    std::vector<double> wealth, returns;
    for (const auto& w : contents.weeks) {
        const int week = w.at("week").get<int>();
        if (week != s.next_week)
            throw std::runtime_error(fmt::format("ledger week {} out of sequence (expected {})", week, s.next_week));
        wealth.push_back(w.at("wealth").get<double>());
        returns.push_back(w.at("portfolio_return").get<double>());
        if (config_.mode == RunMode::Agents) {
            s.history.append({week, w.at("strategy").get<std::string>(), w.at("universe_avg_return").get<double>(),
                              w.at("portfolio_return").get<double>()});
            s.strategy = {week + 1, w.at("next_strategy").get<std::string>()};
        }
        s.next_week = week + 1;
    }
    s.equity.restore(std::move(wealth), std::move(returns));
    return s;
}

Portfolio Pipeline::baseline_portfolio(int t, const std::vector<StockId>& tradable) const {
    if (tradable.empty()) return Portfolio::all_cash(t);
    if (config_.baseline == "1n") return equal_weight(t, tradable);

    const FactorKind kind = parse_factor_kind(config_.baseline);
    const Date as_of = calendar_.week(t - 1).last_day();
    std::map<StockId, double> factors;
    for (const auto& s : tradable)
        if (auto f = factor_score(kind, as_of, rows_for(s))) factors[s] = *f;
    const auto slots = config_.agents.max_positions;
    return top_n_portfolio(t, factors, slots, 1.0 / static_cast<double>(slots));
}

WeekOutcome Pipeline::run_week(const RunState& state, int t) const {
    const TradingWeek& week = calendar_.week(t);
    WeekOutcome out;
    out.week = t;
    out.tradable = data_.bars.tradable(week, universe_);
    for (const auto& s : universe_)
        if (std::find(out.tradable.begin(), out.tradable.end(), s) == out.tradable.end())
            out.flags.push_back(fmt::format("excluded: {} lacks a boundary bar", s.str()));

    if (config_.mode == RunMode::Baseline) {
        out.portfolio = baseline_portfolio(t, out.tradable);
        return out;
    }
    if (!agents_) throw std::logic_error("agent mode needs a chat client");
    if (out.tradable.empty()) {
        out.portfolio = Portfolio::all_cash(t);
        out.flags.push_back("all_cash: no tradable stocks");
        return out;
    }

    struct StockResult {
        std::vector<CallRecord> calls;
        std::optional<ScoreReport> score;
        std::string error;
        std::exception_ptr fatal;
    };
    auto score_stock = [&](const StockId& stock) {
        StockResult r;
        try {
            const auto tech = build_tech_input(stock, t, calendar_, rows_for(stock), config_.context);
            const auto news = build_news_input(stock, t, calendar_, data_.news, config_.context);
            const auto fund = build_fund_input(stock, t, calendar_, data_.fundamentals, config_.context);
            const auto a_news = agents_->analyze(AnalysisKind::News, news, stock, t, r.calls);
            const auto a_tech = agents_->analyze(AnalysisKind::Tech, tech, stock, t, r.calls);
            const auto a_fund = agents_->analyze(AnalysisKind::Fund, fund, stock, t, r.calls);
            const auto overview = build_overview(stock, t, a_news.text, a_tech.text, a_fund.text);
            r.score = agents_->score(overview, r.calls);
        } catch (const CacheMissError&) {
            r.fatal = std::current_exception();
        } catch (const AuthError&) {
            r.fatal = std::current_exception();
        } catch (const std::exception& e) {
            r.error = fmt::format("{}: {}", stock.str(), e.what());
        }
        return r;
    };

    std::vector<std::future<StockResult>> pending;
    for (const auto& stock : out.tradable) pending.push_back(std::async(std::launch::async, score_stock, stock));

    std::vector<std::string> errors;
    std::vector<StockResult> results;
    for (auto& f : pending) results.push_back(f.get());
    for (auto& r : results)
        if (r.fatal) std::rethrow_exception(r.fatal);
    for (auto& r : results) {
        for (auto& c : r.calls) out.calls.push_back(std::move(c));
        if (r.score) out.scores.push_back(*r.score);
        else errors.push_back(r.error);
    }

    if (!errors.empty()) {
        out.portfolio = Portfolio::all_cash(t);
        for (const auto& e : errors) out.flags.push_back("all_cash: agent failure: " + e);
        return out;
    }

    out.portfolio = select_portfolio(*agents_, out.scores, state.strategy, out.tradable, config_.agents.max_positions,
                                     out.calls, out.flags);
    out.portfolio.week = t;
    return out;
}

Portfolio select_portfolio(const Agents& agents, const std::vector<ScoreReport>& scores, const Strategy& strategy,
                           const std::vector<StockId>& tradable, std::size_t max_positions,
                           std::vector<CallRecord>& calls, std::vector<std::string>& flags) {
    Portfolio portfolio;
    try {
        auto selection = agents.select(scores, strategy, tradable, calls);
        portfolio = std::move(selection.portfolio);
        for (auto& f : selection.flags) flags.push_back(std::move(f));
    } catch (const CacheMissError&) {
        throw;
    } catch (const AuthError&) {
        throw;
    } catch (const std::exception& e) {
        flags.push_back(fmt::format("all_cash: selector failure: {}", e.what()));
        return Portfolio::all_cash(strategy.week);
    }
    portfolio.week = strategy.week;
    if (auto violation = portfolio_violation(portfolio, tradable, max_positions)) {
        flags.push_back("all_cash: invalid portfolio: " + *violation);
        return Portfolio::all_cash(strategy.week);
    }
    return portfolio;
}

void Pipeline::settle_and_refine(RunState& state, WeekOutcome outcome) const {
    const int t = outcome.week;
    if (t != state.next_week) throw std::logic_error(fmt::format("settling week {} but expected {}", t, state.next_week));
    const TradingWeek& week = calendar_.week(t);
    const auto settlement = run_settlement(week, outcome.portfolio, data_.bars, outcome.tradable);
    const auto& result = settlement.result;

    json record;
    record["type"] = "week";
    record["schema_version"] = kLedgerSchemaVersion;
    record["week"] = t;
    record["first_day"] = format_date(week.first_day());
    record["last_day"] = format_date(week.last_day());
    json tradable = json::array();
    for (const auto& s : outcome.tradable) tradable.push_back(s.str());
    record["tradable"] = tradable;
    record["portfolio"] = weights_json(result.portfolio.weights);
    record["returns"] = weights_json(settlement.returns.returns);
    record["portfolio_return"] = result.portfolio_return;
    record["universe_avg_return"] = result.universe_avg_return;
    record["cash_fraction"] = result.cash_fraction;

    if (config_.mode == RunMode::Agents) {
        state.history.append({t, state.strategy.text, result.universe_avg_return, result.portfolio_return});
        const Strategy current{t, state.strategy.text};
        auto refined =
            agents_->refine(current, result.portfolio, settlement.returns, outcome.scores, state.history, outcome.calls);
        if (refined.carried_forward) outcome.flags.push_back(refined.flag);
        record["strategy"] = current.text;
        record["next_strategy"] = refined.strategy.text;
        json scores = json::array();
        for (const auto& s : outcome.scores) scores.push_back(s.to_json());
        record["scores"] = scores;
        json calls = json::array();
        for (const auto& c : outcome.calls) calls.push_back(to_json(c));
        record["calls"] = calls;
        state.strategy = refined.strategy;
    }

    state.equity.push(result.portfolio_return);
    record["wealth"] = state.equity.current();
    record["flags"] = outcome.flags;
    state.ledger.append(record);
    state.next_week = t + 1;
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config) {
    if (config.kind == "stub") {
        auto stub = std::make_shared<StubProvider>();
        if (config.stub_script) stub->load_script(*config.stub_script);
        return stub;
    }
    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key)
        throw ConfigError(fmt::format("live agent mode needs a credential: export {} or pass --replay <cache-dir>",
                                      config.api_key_env));
    return std::make_shared<HttpProvider>(
        ProviderSettings{config.base_url, key, std::chrono::milliseconds(config.timeout_ms)});
}

namespace {

struct SingleRun {
    RunSummary summary;
    bool completed = true;
};

SingleRun execute(const Pipeline& pipeline, const fs::path& ledger_path, bool resume,
                  std::optional<int> stop_after) {
    RunState state;
    if (resume && fs::exists(ledger_path)) {
        auto contents = read_ledger(ledger_path);
        state = pipeline.resume_state(contents, Ledger::reopen(ledger_path));
    } else {
        state = pipeline.initial_state(Ledger::create(ledger_path));
        state.ledger.append(pipeline.ledger_header());
    }

    int settled = 0;
    for (int t : pipeline.evaluation_weeks()) {
        if (t < state.next_week) continue;
        if (stop_after && settled >= *stop_after) return {{}, false};
        auto outcome = pipeline.run_week(state, t);
        pipeline.settle_and_refine(state, std::move(outcome));
        ++settled;
    }
    return {summarize_ledger(ledger_path), true};
}

} // namespace

BacktestOutput run_backtest(const RunConfig& config, std::shared_ptr<Provider> provider,
                            const BacktestOptions& options) {
    config.validate();
    const auto data = load_data_store(config.data_dir);
    fs::create_directories(config.output_dir);

    std::optional<ChatClient> client;
    if (config.mode == RunMode::Agents) {
        ClientOptions copts;
        copts.cache_dir = config.provider.cache_dir;
        copts.replay_only = config.provider.replay;
        copts.max_attempts = config.provider.max_attempts;
        copts.base_backoff = std::chrono::milliseconds(config.provider.backoff_ms);
        copts.max_in_flight = config.provider.max_in_flight;
        copts.requests_per_second = config.provider.requests_per_second;
        if (copts.replay_only && !copts.cache_dir) throw ConfigError("replay mode needs a cache directory");
        if (!provider && !copts.replay_only) provider = make_provider(config.provider);
        client.emplace(provider, copts);
    }

    BacktestOutput output;
    Pipeline primary(config, data, client ? &*client : nullptr);
    auto run = execute(primary, config.output_dir / "ledger.jsonl", options.resume, options.stop_after_weeks);
    if (client) {
        output.network_calls = client->network_calls();
        output.cache_hits = client->cache_hits();
    }
    if (!run.completed) {
        output.completed = false;
        return output;
    }
    output.primary = std::move(run.summary);
    write_text_file(config.output_dir / "equity.csv", equity_csv(output.primary));

    for (const auto& name : config.compare_baselines) {
        RunConfig bc = config;
        bc.mode = RunMode::Baseline;
        bc.baseline = name;
        if (bc.run_name() == config.run_name()) continue;
        Pipeline baseline(bc, data);
        auto b = execute(baseline, config.output_dir / fmt::format("ledger_{}.jsonl", name), false, std::nullopt);
        write_text_file(config.output_dir / fmt::format("equity_{}.csv", name), equity_csv(b.summary));
        output.baselines.push_back(std::move(b.summary));
    }

    json report;
    report["schema_version"] = kLedgerSchemaVersion;
    report["runs"] = json::array();
    auto add = [&](const RunSummary& s) {
        json r = metrics_to_json(s.metrics);
        r["name"] = s.name;
        r["final_wealth"] = s.equity.current();
        report["runs"].push_back(r);
    };
    add(output.primary);
    for (const auto& b : output.baselines) add(b);
    write_text_file(config.output_dir / "report.json", report.dump(2) + "\n");
    return output;
}

RunSummary summarize_ledger(const fs::path& path) { return summarize_contents(read_ledger(path), path); }

json metrics_to_json(const MetricsReport& m) {
    json j;
    j["weeks"] = m.weeks;
    j["accumulated_return"] = m.accumulated_return;
    j["sharpe"] = m.sharpe ? json(*m.sharpe) : json(nullptr);
    j["calmar"] = m.calmar ? json(*m.calmar) : json(nullptr);
    j["max_drawdown"] = m.max_drawdown;
    return j;
}

std::string format_report_table(const std::vector<RunSummary>& runs) {
    std::size_t name_width = 3;
    for (const auto& r : runs) name_width = std::max(name_width, r.name.size());
    auto ratio = [](const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : std::string("n/a"); };

    std::string out = fmt::format("{:<{}}  {:>5}  {:>9}  {:>8}  {:>8}  {:>8}\n", "run", name_width, "weeks", "AR(%)",
                                  "SR", "CR", "MDD(%)");
    for (const auto& r : runs) {
        if (r.metrics.weeks == 0) {
            out += fmt::format("{:<{}}  no completed weeks\n", r.name, name_width);
            continue;
        }
        out += fmt::format("{:<{}}  {:>5}  {:>9.2f}  {:>8}  {:>8}  {:>8.2f}\n", r.name, name_width, r.metrics.weeks,
                           r.metrics.accumulated_return * 100.0, ratio(r.metrics.sharpe), ratio(r.metrics.calmar),
                           r.metrics.max_drawdown * 100.0);
    }
    return out;
}

} // namespace tristrat
