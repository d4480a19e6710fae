#include "fixture.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <unistd.h>

namespace fixture {

namespace fs = std::filesystem;
using namespace std::chrono;

namespace {

double cents(double v) { return std::round(v * 100.0) / 100.0; }

/// Uniform integer in [-spread, spread] from the raw engine output.
int step(std::mt19937_64& rng, int spread) {
    return static_cast<int>(rng() % static_cast<std::uint64_t>(2 * spread + 1)) - spread;
}

} // namespace

std::vector<StockId> tickers(int count) {
    static const char* names[] = {"ALPH", "BETA", "GAMM", "DELT", "EPSI", "ZETA", "ETA",  "THET",
                                  "IOTA", "KAPP", "LAMB", "MU",   "NU",   "XI",   "OMIC", "PI"};
    std::vector<StockId> out;
    for (int i = 0; i < count; ++i) out.emplace_back(names[i]);
    return out;
}

std::vector<DailyBar> make_bars(const Spec& spec) {
    std::mt19937_64 rng(spec.seed);
    const auto ids = tickers(spec.stocks);
    std::vector<DailyBar> bars;
    for (int s = 0; s < spec.stocks; ++s) {
        double close = 40.0 + 15.0 * s;
        for (int w = 0; w < spec.weeks; ++w) {
            for (int d = 0; d < 5; ++d) {
                const Date date = spec.first_monday + days(7 * w + d);
                const int gap = step(rng, 40);
                const int move = step(rng, 250);
                if (std::find(spec.holidays.begin(), spec.holidays.end(), date) != spec.holidays.end()) continue;
                const bool skip = std::any_of(spec.missing.begin(), spec.missing.end(),
                                              [&](const auto& m) { return m.first == s && m.second == date; });
                const double open = cents(close * (1.0 + gap / 10000.0));
                const double next = cents(open * (1.0 + move / 10000.0));
                if (!skip) {
                    DailyBar b;
                    b.stock = ids[s];
                    b.date = date;
                    b.open = open;
                    b.close = next;
                    b.high = cents(std::max(open, next) + 0.25);
                    b.low = cents(std::min(open, next) - 0.25);
                    b.volume = 100000.0 + 1000.0 * ((w * 5 + d + s) % 37);
                    bars.push_back(b);
                }
                close = next;
            }
        }
    }
    std::sort(bars.begin(), bars.end(), [](const DailyBar& a, const DailyBar& b) {
        return std::tie(a.stock, a.date) < std::tie(b.stock, b.date);
    });
    return bars;
}

std::vector<NewsItem> make_news(const Spec& spec) {
    const auto ids = tickers(spec.stocks);
    std::vector<NewsItem> out;
    for (int w = 0; w < spec.weeks; ++w)
        for (int s = 0; s < spec.stocks; ++s) {
            if ((w + s) % 5 == 4) continue; // some quiet weeks
            NewsItem n;
            n.stock = ids[s];
            n.date = spec.first_monday + days(7 * w + 2 + s % 3);
            n.title = fmt::format("{} update {}", ids[s].str(), w + 1);
            n.summary = fmt::format("Company {} reported routine developments in week {}.", ids[s].str(), w + 1);
            out.push_back(std::move(n));
        }
    return out;
}

std::vector<FundamentalReport> make_fundamentals(const Spec& spec) {
    const auto ids = tickers(spec.stocks);
    std::vector<FundamentalReport> out;
    for (int s = 0; s < spec.stocks; ++s) {
        const std::pair<const char*, const char*> quarters[] = {
            {"2023Q2", "2023-08-02"}, {"2023Q3", "2023-11-01"}, {"2023Q4", "2024-02-07"}};
        int k = 0;
        for (const auto& [q, release] : quarters) {
            FundamentalReport r;
            r.stock = ids[s];
            r.fiscal_quarter = tristrat::FiscalQuarter::parse(q);
            r.release_date = tristrat::parse_date(release) + days(s);
            r.statements = {{"revenue", 1000.0 + 100.0 * s + 25.0 * k},
                            {"net_income", 80.0 + 5.0 * s - 3.0 * k},
                            {"eps", 1.2 + 0.1 * s + 0.05 * k}};
            out.push_back(std::move(r));
            ++k;
        }
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_store(const fs::path& dir, const Spec& spec) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "bars.csv", std::ios::binary);
        tristrat::write_daily_bars(out, make_bars(spec));
    }
    {
        std::ofstream out(dir / "news.jsonl", std::ios::binary);
        tristrat::write_news(out, make_news(spec));
    }
    {
        std::ofstream out(dir / "fundamentals.jsonl", std::ios::binary);
        tristrat::write_fundamentals(out, make_fundamentals(spec));
    }
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() / fmt::format("tristrat-{}-{}-{}", tag, ::getpid(), counter++);
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

} // namespace fixture
