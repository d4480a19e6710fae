#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tristrat/market_data.hpp"

namespace fixture {

using tristrat::DailyBar;
using tristrat::Date;
using tristrat::FundamentalReport;
using tristrat::NewsItem;
using tristrat::StockId;

struct Spec {
    int stocks = 6;
    int weeks = 12;
    Date first_monday = tristrat::parse_date("2024-01-08");
    std::vector<Date> holidays = {tristrat::parse_date("2024-02-19")};
    std::uint64_t seed = 7;
    /// (stock index, date) rows left out to exercise exclusion.
    std::vector<std::pair<int, Date>> missing;
};

std::vector<StockId> tickers(int count);

std::vector<DailyBar> make_bars(const Spec& spec);
std::vector<NewsItem> make_news(const Spec& spec);
std::vector<FundamentalReport> make_fundamentals(const Spec& spec);

/// Writes bars.csv, news.jsonl and fundamentals.jsonl.
void write_store(const std::filesystem::path& dir, const Spec& spec);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace fixture
