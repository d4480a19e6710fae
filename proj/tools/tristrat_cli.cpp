#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tristrat/market_data.hpp"
#include "tristrat/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tristrat;

namespace {

constexpr int kUsageError = 2;

template <class Loader>
auto load_file(const fs::path& path, Loader loader) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("{}: cannot open", path.string()));
    try {
        return loader(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(fmt::format("{}: {}", path.string(), e.what()));
    }
}

template <class Writer, class Items>
void write_atomic(const fs::path& path, Writer writer, const Items& items) {
    std::ostringstream buffer;
    writer(buffer, items);
    const std::string text = buffer.str();
    if (fs::exists(path)) {
        std::ifstream old(path, std::ios::binary);
        std::stringstream current;
        current << old.rdbuf();
        if (current.str() == text) return;
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw std::runtime_error(fmt::format("{}: write failed", tmp.string()));
    }
    fs::rename(tmp, path);
}

int cmd_ingest(const fs::path& bars_path, const std::optional<fs::path>& news_path,
               const std::optional<fs::path>& fund_path, const fs::path& out_dir) {
    std::vector<std::string> errors;
    std::vector<DailyBar> bars;
    std::vector<NewsItem> news;
    std::vector<FundamentalReport> fundamentals;

    try {
        bars = load_file(bars_path, [](std::istream& in) { return load_daily_bars(in); });
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }
    if (news_path) {
        try {
            news = load_file(*news_path, [](std::istream& in) { return load_news(in); });
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }
    if (fund_path) {
        try {
            fundamentals = load_file(*fund_path, [](std::istream& in) { return load_fundamentals(in); });
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << "error: " << e << '\n';
        return 1;
    }

    fs::create_directories(out_dir);
    write_atomic(out_dir / "bars.csv", write_daily_bars, bars);
    write_atomic(out_dir / "news.jsonl", write_news, news);
    write_atomic(out_dir / "fundamentals.jsonl", write_fundamentals, fundamentals);

    std::size_t symbols = 0;
    for (std::size_t i = 0; i < bars.size(); ++i)
        if (i == 0 || !(bars[i].stock == bars[i - 1].stock)) ++symbols;
    fmt::print("bars: {} rows, {} symbols\n", bars.size(), symbols);
    fmt::print("news: {} items\n", news.size());
    fmt::print("fundamentals: {} reports\n", fundamentals.size());
    fmt::print("store: {}\n", out_dir.string());
    return 0;
}

struct BacktestArgs {
    fs::path config;
    std::string baseline;
    bool agents = false;
    std::optional<fs::path> replay;
    std::optional<fs::path> cache;
    std::optional<fs::path> out;
    std::vector<std::string> compare;
    bool resume = false;
};

int cmd_backtest(const BacktestArgs& args) {
    RunConfig config = RunConfig::load(args.config);
    if (args.agents) config.mode = RunMode::Agents;
    if (!args.baseline.empty()) {
        config.mode = RunMode::Baseline;
        config.baseline = args.baseline;
    }
    if (args.replay) {
        config.provider.cache_dir = *args.replay;
        config.provider.replay = true;
    }
    if (args.cache) config.provider.cache_dir = *args.cache;
    if (args.out) config.output_dir = *args.out;
    if (!args.compare.empty()) config.compare_baselines = args.compare;

    BacktestOptions options;
    options.resume = args.resume;
    const auto output = run_backtest(config, nullptr, options);

    std::vector<RunSummary> runs{output.primary};
    runs.insert(runs.end(), output.baselines.begin(), output.baselines.end());
    std::cout << format_report_table(runs);
    if (config.mode == RunMode::Agents)
        fmt::print("provider calls: {}, cache hits: {}\n", output.network_calls, output.cache_hits);
    fmt::print("wrote {}\n", (config.output_dir / "report.json").string());
    return 0;
}

int cmd_report(const std::vector<fs::path>& ledgers) {
    std::vector<RunSummary> runs;
    for (const auto& path : ledgers) runs.push_back(summarize_ledger(path));
    std::map<std::string, int> uses;
    for (const auto& r : runs) ++uses[r.name];
    for (auto& r : runs)
        if (uses[r.name] > 1) r.name = fmt::format("{} ({})", r.name, r.ledger_path.string());
    std::cout << format_report_table(runs);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weekly multi-agent portfolio backtester"};
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "Validate raw files into a canonical data store");
    fs::path bars_path, out_dir;
    std::optional<fs::path> news_path, fund_path;
    ingest->add_option("--bars", bars_path, "Daily bars CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--news", news_path, "News JSON lines")->check(CLI::ExistingFile);
    ingest->add_option("--fundamentals", fund_path, "Fundamentals JSON lines")->check(CLI::ExistingFile);
    ingest->add_option("--out", out_dir, "Data store directory")->required();

    auto* backtest = app.add_subcommand("backtest", "Run a backtest from a TOML config");
    BacktestArgs bt;
    backtest->add_option("--config", bt.config, "Config file")->required()->check(CLI::ExistingFile);
    auto* baseline_opt = backtest->add_option("--baseline", bt.baseline, "Baseline run")
                             ->check(CLI::IsMember({"1n", "sma", "macd", "boll"}));
    auto* agents_flag = backtest->add_flag("--agents", bt.agents, "Run the agent pipeline");
    baseline_opt->excludes(agents_flag);
    backtest->add_option("--replay", bt.replay, "Serve agent calls only from this response cache");
    backtest->add_option("--cache", bt.cache, "Response cache directory for live calls");
    backtest->add_option("--out", bt.out, "Output directory");
    backtest->add_option("--compare", bt.compare, "Baselines to run alongside")
        ->check(CLI::IsMember({"1n", "sma", "macd", "boll"}));
    backtest->add_flag("--resume", bt.resume, "Continue from an existing ledger");

    auto* report = app.add_subcommand("report", "Summarize one or more ledgers");
    std::vector<fs::path> ledgers;
    report->add_option("ledgers", ledgers, "Ledger files")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*ingest) return cmd_ingest(bars_path, news_path, fund_path, out_dir);
        if (*backtest) return cmd_backtest(bt);
        if (*report) return cmd_report(ledgers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsageError;
}
