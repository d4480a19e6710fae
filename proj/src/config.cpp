#include "tristrat/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace tristrat {

namespace fs = std::filesystem;

namespace {

class TomlLine {
public:
    TomlLine(std::string_view text, std::size_t line) : text_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    bool at_end_or_comment() {
        skip_ws();
        return pos_ >= text_.size() || text_[pos_] == '#';
    }
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(fmt::format("expected '{}'", c));
        ++pos_;
    }

    std::string key() {
        skip_ws();
        if (peek() == '"') return basic_string();
        const auto start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                       text_[pos_] == '-'))
            ++pos_;
        if (start == pos_) fail("expected a key");
        return std::string(text_.substr(start, pos_ - start));
    }

    TomlValue value() {
        skip_ws();
        if (peek() == '[') {
            ++pos_;
            std::vector<TomlScalar> items;
            skip_ws();
            if (peek() == ']') {
                ++pos_;
                return items;
            }
            while (true) {
                items.push_back(scalar());
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_ws();
                    if (peek() == ']') {
                        ++pos_;
                        return items;
                    }
                    continue;
                }
                if (peek() == ']') {
                    ++pos_;
                    return items;
                }
                fail("expected ',' or ']' in array");
            }
        }
        return std::visit([](auto&& v) -> TomlValue { return v; }, scalar());
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(fmt::format("config line {}: {}", line_, what));
    }

private:
    TomlScalar scalar() {
        skip_ws();
        if (peek() == '"') return basic_string();
        if (text_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return true;
        }
        if (text_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return false;
        }
        const auto start = pos_;
        while (pos_ < text_.size() && std::string_view("+-.0123456789eE_").find(text_[pos_]) != std::string_view::npos)
            ++pos_;
        std::string number;
        for (char c : text_.substr(start, pos_ - start))
            if (c != '_') number += c;
        if (number.empty()) fail("expected a value");
        const char* first = number.data() + (number.front() == '+' ? 1 : 0);
        const char* last = number.data() + number.size();
        if (number.find_first_of(".eE") == std::string::npos) {
            long long v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec == std::errc{} && ptr == last) return v;
        } else {
            double v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec == std::errc{} && ptr == last) return v;
        }
        fail(fmt::format("bad number '{}'", number));
    }

    std::string basic_string() {
        ++pos_; // opening quote
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = text_[pos_++];
            if (c == '\\') {
                if (pos_ >= text_.size()) break;
                switch (char e = text_[pos_++]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(fmt::format("unsupported escape '\\{}'", e));
                }
            } else {
                out += c;
            }
        }
        if (pos_ >= text_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

template <typename T>
std::optional<T> get_as(const std::map<std::string, TomlValue>& values, const std::string& key);

template <>
std::optional<std::string> get_as(const std::map<std::string, TomlValue>& values, const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    if (auto s = std::get_if<std::string>(&it->second)) return *s;
    throw ConfigError(fmt::format("'{}' must be a string", key));
}

template <>
std::optional<long long> get_as(const std::map<std::string, TomlValue>& values, const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    if (auto v = std::get_if<long long>(&it->second)) return *v;
    throw ConfigError(fmt::format("'{}' must be an integer", key));
}

template <>
std::optional<double> get_as(const std::map<std::string, TomlValue>& values, const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    if (auto v = std::get_if<double>(&it->second)) return *v;
    if (auto v = std::get_if<long long>(&it->second)) return static_cast<double>(*v);
    throw ConfigError(fmt::format("'{}' must be a number", key));
}

template <>
std::optional<bool> get_as(const std::map<std::string, TomlValue>& values, const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    if (auto v = std::get_if<bool>(&it->second)) return *v;
    throw ConfigError(fmt::format("'{}' must be a boolean", key));
}

std::optional<std::vector<std::string>> get_strings(const std::map<std::string, TomlValue>& values,
                                                    const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    auto arr = std::get_if<std::vector<TomlScalar>>(&it->second);
    if (!arr) throw ConfigError(fmt::format("'{}' must be an array of strings", key));
    std::vector<std::string> out;
    for (const auto& item : *arr) {
        auto s = std::get_if<std::string>(&item);
        if (!s) throw ConfigError(fmt::format("'{}' must be an array of strings", key));
        out.push_back(*s);
    }
    return out;
}

template <typename Int, typename T>
void set_int(const std::map<std::string, TomlValue>& values, const std::string& key, T& target) {
    if (auto v = get_as<long long>(values, key)) target = static_cast<Int>(*v);
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

Date date_value(const std::string& key, const std::string& text) {
    try {
        return parse_date(text);
    } catch (const std::invalid_argument&) {
        throw ConfigError(fmt::format("'{}' is not a YYYY-MM-DD date: '{}'", key, text));
    }
}

const std::set<std::string> kKnownKeys = {
    "agents.max_tokens", "agents.model", "agents.temperature", "data.dir", "data.end", "data.start",
    "data.universe", "data.universe_file", "indicators.atr_window", "indicators.boll_k", "indicators.boll_window",
    "indicators.macd_fast", "indicators.macd_signal", "indicators.macd_slow", "indicators.rsi_window",
    "indicators.sma_window", "provider.api_key_env", "provider.backoff_ms", "provider.base_url",
    "provider.cache_dir", "provider.kind", "provider.max_attempts", "provider.max_in_flight", "provider.replay",
    "provider.requests_per_second", "provider.stub_script", "provider.timeout_ms", "run.baseline",
    "run.compare_baselines", "run.history_capacity", "run.lookback_weeks", "run.max_fundamental_quarters",
    "run.max_positions", "run.max_section_chars", "run.mode", "run.news_lookback_weeks", "run.output_dir",
};

} // namespace

std::map<std::string, TomlValue> parse_toml(const std::string& text) {
    std::map<std::string, TomlValue> out;
    std::istringstream in(text);
    std::string raw;
    std::string table;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        TomlLine line(raw, line_no);
        if (line.at_end_or_comment()) continue;
        if (line.peek() == '[') {
            line.expect('[');
            table = line.key();
            line.expect(']');
            if (!line.at_end_or_comment()) line.fail("trailing characters after table header");
            continue;
        }
        const std::string key = line.key();
        line.expect('=');
        TomlValue v = line.value();
        if (!line.at_end_or_comment()) line.fail("trailing characters after value");
        const std::string full = table.empty() ? key : table + "." + key;
        if (!out.emplace(full, std::move(v)).second) line.fail(fmt::format("duplicate key '{}'", full));
    }
    return out;
}

bool is_known_baseline(const std::string& name) {
    return name == "1n" || name == "sma" || name == "macd" || name == "boll";
}

void RunConfig::validate() const {
    if (history_capacity < 1) throw ConfigError("history_capacity must be >= 1");
    if (agents.max_positions < 1) throw ConfigError("max_positions must be >= 1");
    if (context.tech_lookback_weeks < 1 || context.news_lookback_weeks < 1)
        throw ConfigError("lookback weeks must be >= 1");
    if (!(agents.temperature >= 0.0 && agents.temperature <= 2.0)) throw ConfigError("temperature must be in [0,2]");
    if (mode == RunMode::Baseline && !is_known_baseline(baseline))
        throw ConfigError(fmt::format("unknown baseline '{}' (expected 1n, sma, macd or boll)", baseline));
    for (const auto& b : compare_baselines)
        if (!is_known_baseline(b)) throw ConfigError(fmt::format("unknown baseline '{}' in compare_baselines", b));
    if (start && end && *end < *start) throw ConfigError("end date precedes start date");
    if (indicators.macd_slow <= indicators.macd_fast) throw ConfigError("macd slow window must exceed fast window");
    if (provider.kind != "openai" && provider.kind != "stub")
        throw ConfigError(fmt::format("unknown provider kind '{}'", provider.kind));
}

std::string RunConfig::run_name() const {
    return mode == RunMode::Agents ? std::string("agents") : "baseline:" + baseline;
}

RunConfig RunConfig::from_toml(const std::string& text, const fs::path& base_dir) {
    const auto v = parse_toml(text);
    for (const auto& [key, _] : v)
        if (!kKnownKeys.count(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));
    RunConfig c;

    if (auto s = get_as<std::string>(v, "data.dir")) c.data_dir = resolve(base_dir, *s);
    else throw ConfigError("missing 'data.dir'");
    if (auto list = get_strings(v, "data.universe"))
        for (const auto& s : *list) c.universe.emplace_back(s);
    if (auto file = get_as<std::string>(v, "data.universe_file")) {
        std::ifstream in(resolve(base_dir, *file));
        if (!in) throw ConfigError(fmt::format("cannot open universe file '{}'", *file));
        std::string ticker;
        while (in >> ticker)
            if (ticker.front() != '#') c.universe.emplace_back(ticker);
    }
    if (auto s = get_as<std::string>(v, "data.start")) c.start = date_value("data.start", *s);
    if (auto s = get_as<std::string>(v, "data.end")) c.end = date_value("data.end", *s);

    if (auto s = get_as<std::string>(v, "run.mode")) {
        if (*s == "agents") c.mode = RunMode::Agents;
        else if (*s == "baseline") c.mode = RunMode::Baseline;
        else throw ConfigError(fmt::format("run.mode must be 'agents' or 'baseline', got '{}'", *s));
    }
    if (auto s = get_as<std::string>(v, "run.baseline")) c.baseline = *s;
    if (auto list = get_strings(v, "run.compare_baselines")) c.compare_baselines = *list;
    if (auto s = get_as<std::string>(v, "run.output_dir")) c.output_dir = resolve(base_dir, *s);
    set_int<std::size_t>(v, "run.history_capacity", c.history_capacity);
    set_int<std::size_t>(v, "run.max_positions", c.agents.max_positions);
    set_int<int>(v, "run.lookback_weeks", c.context.tech_lookback_weeks);
    set_int<int>(v, "run.news_lookback_weeks", c.context.news_lookback_weeks);
    set_int<std::size_t>(v, "run.max_fundamental_quarters", c.context.max_fundamental_quarters);
    set_int<std::size_t>(v, "run.max_section_chars", c.context.max_section_chars);

    set_int<int>(v, "indicators.sma_window", c.indicators.sma_window);
    set_int<int>(v, "indicators.atr_window", c.indicators.atr_window);
    set_int<int>(v, "indicators.rsi_window", c.indicators.rsi_window);
    set_int<int>(v, "indicators.macd_fast", c.indicators.macd_fast);
    set_int<int>(v, "indicators.macd_slow", c.indicators.macd_slow);
    set_int<int>(v, "indicators.macd_signal", c.indicators.macd_signal);
    set_int<int>(v, "indicators.boll_window", c.indicators.boll_window);
    if (auto d = get_as<double>(v, "indicators.boll_k")) c.indicators.boll_k = *d;

    if (auto s = get_as<std::string>(v, "agents.model")) c.agents.model = *s;
    if (auto d = get_as<double>(v, "agents.temperature")) c.agents.temperature = *d;
    set_int<int>(v, "agents.max_tokens", c.agents.max_tokens);

    if (auto s = get_as<std::string>(v, "provider.kind")) c.provider.kind = *s;
    if (auto s = get_as<std::string>(v, "provider.base_url")) c.provider.base_url = *s;
    if (auto s = get_as<std::string>(v, "provider.api_key_env")) c.provider.api_key_env = *s;
    if (auto s = get_as<std::string>(v, "provider.stub_script")) c.provider.stub_script = resolve(base_dir, *s);
    if (auto s = get_as<std::string>(v, "provider.cache_dir")) c.provider.cache_dir = resolve(base_dir, *s);
    set_int<int>(v, "provider.timeout_ms", c.provider.timeout_ms);
    set_int<int>(v, "provider.max_attempts", c.provider.max_attempts);
    set_int<int>(v, "provider.backoff_ms", c.provider.backoff_ms);
    set_int<int>(v, "provider.max_in_flight", c.provider.max_in_flight);
    if (auto d = get_as<double>(v, "provider.requests_per_second")) c.provider.requests_per_second = *d;
    if (auto b = get_as<bool>(v, "provider.replay")) c.provider.replay = *b;

    c.validate();
    return c;
}

RunConfig RunConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return from_toml(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

} // namespace tristrat
