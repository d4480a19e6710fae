#include "tristrat/chat.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <httplib.h>

namespace tristrat {

using json = nlohmann::json;
namespace fs = std::filesystem;

void ChatRequest::validate() const {
    if (messages.empty()) throw std::invalid_argument("chat request has no messages");
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw std::invalid_argument(fmt::format("temperature {} outside [0,2]", temperature));
    if (model.empty()) throw std::invalid_argument("chat request has no model");
}

std::string ChatRequest::rendered_prompt() const {
    std::string out;
    for (const auto& m : messages) {
        out += "<|" + m.role + "|>\n";
        out += m.content;
        out += '\n';
    }
    return out;
}

std::string chat_request_body(const ChatRequest& request) {
    json body;
    body["model"] = request.model;
    body["messages"] = json::array();
    for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    return body.dump();
}

ChatResponse parse_chat_completion(const std::string& raw_body) {
    json body;
    try {
        body = json::parse(raw_body);
    } catch (const json::parse_error& e) {
        throw MalformedResponseError(fmt::format("provider payload is not JSON: {}", e.what()));
    }
    const json* content = nullptr;
    if (body.is_object() && body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
        const auto& choice = body["choices"][0];
        if (choice.is_object() && choice.contains("message") && choice["message"].is_object() &&
            choice["message"].contains("content"))
            content = &choice["message"]["content"];
    }
    if (!content) throw MalformedResponseError("provider payload has no choices[0].message.content");

    ChatResponse r;
    if (content->is_string()) r.content = content->get<std::string>();
    else if (!content->is_null()) throw MalformedResponseError("choices[0].message.content is not a string");
    if (body.contains("usage") && body["usage"].is_object()) {
        r.prompt_tokens = body["usage"].value("prompt_tokens", 0);
        r.completion_tokens = body["usage"].value("completion_tokens", 0);
    }
    r.provider_id = body.value("model", std::string{});
    r.raw_body = raw_body;
    return r;
}

std::string make_chat_completion_body(const std::string& content, const std::string& model) {
    json body;
    body["object"] = "chat.completion";
    body["model"] = model;
    body["choices"] = json::array({{{"index", 0},
                                    {"message", {{"role", "assistant"}, {"content", content}}},
                                    {"finish_reason", "stop"}}});
    body["usage"] = {{"prompt_tokens", 0}, {"completion_tokens", 0}};
    return body.dump();
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string hex;
    hex.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string cache_key(const std::string& model, const std::string& rendered_prompt) {
    std::string material = model;
    material += '\0';
    material += rendered_prompt;
    return sha256_hex(material);
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::ifstream in(dir_ / key, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ResponseCache::put(const std::string& key, const std::string& raw_body) const {
    static std::atomic<unsigned long> counter{0};
    const auto tmp = dir_ / fmt::format(".{}.{}.tmp", key, counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write cache file {}", tmp.string()));
        out << raw_body;
    }
    fs::rename(tmp, dir_ / key);
}

HttpProvider::HttpProvider(ProviderSettings settings) : settings_(std::move(settings)) {
    if (settings_.api_key.empty()) throw AuthError("no API credential configured (set TRISTRAT_API_KEY)");
}

std::string HttpProvider::send(const ChatRequest& request) {
    // Split "scheme://host[:port]/prefix" into the client origin and path prefix.
    const auto& url = settings_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ProviderError(fmt::format("bad provider URL '{}'", url));
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? std::string{} : url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client client(origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(settings_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(settings_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    client.set_bearer_token_auth(settings_.api_key);

    auto result = client.Post(prefix + "/chat/completions", chat_request_body(request), "application/json");
    if (!result) {
        const auto err = result.error();
        if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout)
            throw TimeoutError(fmt::format("provider timeout: {}", httplib::to_string(err)));
        throw TransportError(fmt::format("provider transport failure: {}", httplib::to_string(err)));
    }
    const int status = result->status;
    if (status == 401 || status == 403) throw AuthError(fmt::format("provider rejected credential (HTTP {})", status));
    if (status == 408) throw TimeoutError("provider timeout (HTTP 408)");
    if (status == 429 || status >= 500) throw TransportError(fmt::format("provider unavailable (HTTP {})", status));
    if (status != 200) throw ProviderError(fmt::format("provider returned HTTP {}: {}", status, result->body));
    return result->body;
}

ChatClient::ChatClient(std::shared_ptr<Provider> provider, ClientOptions options)
    : provider_(std::move(provider)), options_(std::move(options)) {
    if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
    if (options_.max_attempts < 1) options_.max_attempts = 1;
    if (options_.max_in_flight < 1) options_.max_in_flight = 1;
    if (options_.replay_only && !cache_) throw std::invalid_argument("replay mode needs a cache directory");
    if (!provider_ && !options_.replay_only) throw std::invalid_argument("chat client needs a provider");
}

void ChatClient::acquire_slot() {
    std::unique_lock lock(slot_mutex_);
    slot_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
    ++in_flight_;
}

void ChatClient::release_slot() {
    {
        std::lock_guard lock(slot_mutex_);
        --in_flight_;
    }
    slot_cv_.notify_one();
}

void ChatClient::wait_for_rate_limit() {
    if (options_.requests_per_second <= 0.0) return;
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / options_.requests_per_second));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(rate_mutex_);
        const auto now = std::chrono::steady_clock::now();
        // Bucket depth of one second's worth of requests.
        const auto burst = interval * std::max(1, static_cast<int>(options_.requests_per_second));
        if (next_allowed_ < now - burst + interval) next_allowed_ = now - burst + interval;
        slot = next_allowed_;
        next_allowed_ += interval;
    }
    std::this_thread::sleep_until(slot);
}

ChatResponse ChatClient::complete(const ChatRequest& request) {
    request.validate();
    const std::string key = cache_key(request.model, request.rendered_prompt());

    if (cache_) {
        if (auto hit = cache_->get(key)) {
            ++cache_hits_;
            auto response = parse_chat_completion(*hit);
            response.cache_key = key;
            response.from_cache = true;
            return response;
        }
        if (options_.replay_only)
            throw CacheMissError(fmt::format("replay cache has no entry {} for {} {} week {}", key, request.tag.role,
                                             request.tag.stock, request.tag.week));
    }

    acquire_slot();
    struct SlotGuard {
        ChatClient* self;
        ~SlotGuard() { self->release_slot(); }
    } guard{this};

    for (int attempt = 1;; ++attempt) {
        wait_for_rate_limit();
        try {
            ++network_calls_;
            std::string body = provider_->send(request);
            auto response = parse_chat_completion(body);
            response.cache_key = key;
            if (response.provider_id.empty()) response.provider_id = provider_->id();
            if (cache_) cache_->put(key, body);
            return response;
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= options_.max_attempts) throw;
        }
        std::this_thread::sleep_for(options_.base_backoff * (1 << (attempt - 1)));
    }
}

} // namespace tristrat
