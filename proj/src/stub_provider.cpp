#include "tristrat/stub_provider.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace tristrat {

using json = nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> candidate_tickers(const std::string& prompt) {
    static const std::string marker = "Candidate tickers: ";
    std::vector<std::string> out;
    auto pos = prompt.find(marker);
    if (pos == std::string::npos) return out;
    pos += marker.size();
    const auto end = prompt.find('\n', pos);
    std::stringstream ss(prompt.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace

std::string mock_analyst_reply(const ChatRequest& request) {
    const auto& tag = request.tag;
    const auto seed = fnv1a(fmt::format("{}/{}/{}", tag.role, tag.stock, tag.week));

    if (tag.role == "news" || tag.role == "tech" || tag.role == "fund") {
        static const char* tone[] = {"constructive", "mixed", "cautious", "neutral"};
        return fmt::format("{} analysis of {} for week {}: signals look {}.", tag.role, tag.stock, tag.week,
                           tone[seed % 4]);
    }
    if (tag.role == "score") {
        json scores;
        const char* dims[] = {"financial_health", "growth_potential", "news_sentiment",
                              "news_impact",      "price_momentum",   "volatility_risk"};
        auto h = seed;
        for (const char* d : dims) {
            scores[d] = static_cast<int>(1 + h % 10);
            h = h / 10 + fnv1a(d);
        }
        scores["rationale"] = fmt::format("Scripted assessment of {} in week {}.", tag.stock, tag.week);
        return "Scores below.\n```json\n" + scores.dump(2) + "\n```";
    }
    if (tag.role == "select") {
        auto tickers = candidate_tickers(request.messages.back().content);
        std::sort(tickers.begin(), tickers.end(), [&](const std::string& a, const std::string& b) {
            return fnv1a(fmt::format("{}#{}", a, tag.week)) < fnv1a(fmt::format("{}#{}", b, tag.week));
        });
        if (tickers.size() > 3) tickers.resize(3);
        json weights = json::object();
        for (const auto& t : tickers) weights[t] = 0.3;
        return "```json\n" + weights.dump() + "\n```";
    }
    if (tag.role == "strategy") {
        static const char* focus[] = {"Financial Health", "Growth Potential", "News Sentiment", "Price Momentum"};
        return fmt::format("Week {} strategy: emphasise {} and avoid stocks with high Volatility Risk.",
                           tag.week + 1, focus[seed % 4]);
    }
    return "OK";
}

StubProvider::StubProvider() : fallback_(mock_analyst_reply) {}

void StubProvider::load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open stub script {}", path.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(fmt::format("stub script {}: {}", path.string(), e.what()));
    }
    if (!j.is_object()) throw std::runtime_error("stub script must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        std::vector<std::string> replies;
        if (value.is_string()) replies.push_back(value.get<std::string>());
        else if (value.is_array())
            for (const auto& v : value) replies.push_back(v.get<std::string>());
        else throw std::runtime_error(fmt::format("stub script entry '{}' must be a string or array", key));
        script(key, std::move(replies));
    }
}

void StubProvider::script(const std::string& key, std::vector<std::string> replies) {
    std::lock_guard lock(mutex_);
    scripts_[key] = std::move(replies);
    cursor_.erase(key);
}

void StubProvider::inject_transport_failures(int count) {
    std::lock_guard lock(mutex_);
    pending_failures_ = count;
}

std::string StubProvider::script_key(const CallTag& tag) {
    return fmt::format("{}/{}/{}", tag.role, tag.stock, tag.week);
}

std::string StubProvider::send(const ChatRequest& request) {
    std::string reply;
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        requests_.push_back(request);
        if (pending_failures_ > 0) {
            --pending_failures_;
            throw TransportError("injected transport failure");
        }
        auto hashed = scripts_.find("hash:" + cache_key(request.model, request.rendered_prompt()));
        auto scripted = scripts_.find(script_key(request.tag));
        if (hashed != scripts_.end() && !hashed->second.empty()) {
            reply = hashed->second.front();
        } else if (scripted != scripts_.end() && !scripted->second.empty()) {
            auto& n = cursor_[scripted->first];
            reply = scripted->second[std::min(n, scripted->second.size() - 1)];
            ++n;
        } else {
            reply = fallback_(request);
        }
    }
    return make_chat_completion_body(reply, request.model);
}

long StubProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::vector<ChatRequest> StubProvider::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

} // namespace tristrat
