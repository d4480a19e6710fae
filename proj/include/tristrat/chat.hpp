#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tristrat {

struct ChatMessage {
    std::string role; // "system", "user", "assistant"
    std::string content;
};

/// Identifies which agent call a request belongs to. Never sent on the wire;
/// the stub provider keys its scripts on it.
struct CallTag {
    std::string role; // news, tech, fund, score, select, strategy
    std::string stock;
    int week = 0;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    CallTag tag;

    /// Throws std::invalid_argument on empty messages or temperature outside [0,2].
    void validate() const;
    /// Role-labelled concatenation of all messages; part of the cache key.
    std::string rendered_prompt() const;
};

struct ChatResponse {
    std::string content;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    std::string provider_id;
    std::string raw_body;
    std::string cache_key;
    bool from_cache = false;
};

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual bool retryable() const noexcept { return false; }
};

class AuthError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class TimeoutError : public ProviderError {
public:
    using ProviderError::ProviderError;
    bool retryable() const noexcept override { return true; }
};

class TransportError : public ProviderError {
public:
    using ProviderError::ProviderError;
    bool retryable() const noexcept override { return true; }
};

class MalformedResponseError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// Replay mode found no cached response for a request.
class CacheMissError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// A chat-completion backend. `send` returns the raw response body in the
/// OpenAI chat-completions shape.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string send(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
};

/// JSON body for POST /chat/completions.
std::string chat_request_body(const ChatRequest& request);
/// Reads choices[0].message.content and usage; throws MalformedResponseError.
ChatResponse parse_chat_completion(const std::string& raw_body);
/// Builds a minimal chat-completions body carrying `content`.
std::string make_chat_completion_body(const std::string& content, const std::string& model);

std::string sha256_hex(const std::string& data);
/// SHA-256 over (model, rendered prompt).
std::string cache_key(const std::string& model, const std::string& rendered_prompt);

/// Directory of raw response bodies named by cache key.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& raw_body) const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
};

struct ProviderSettings {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::chrono::milliseconds timeout{60000};
};

/// OpenAI-compatible HTTP endpoint.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderSettings settings);
    std::string send(const ChatRequest& request) override;
    std::string id() const override { return "http:" + settings_.base_url; }

private:
    ProviderSettings settings_;
};

struct ClientOptions {
    std::optional<std::filesystem::path> cache_dir;
    bool replay_only = false;
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{200};
    int max_in_flight = 4;
    double requests_per_second = 0.0; // 0 disables rate limiting
};

/// Cache-fronted, retrying, rate-limited access to a provider. Safe for
/// concurrent use.
class ChatClient {
public:
    ChatClient(std::shared_ptr<Provider> provider, ClientOptions options = {});

    ChatResponse complete(const ChatRequest& request);

    /// Provider invocations, including failed attempts. Cache hits do not count.
    long network_calls() const noexcept { return network_calls_.load(); }
    long cache_hits() const noexcept { return cache_hits_.load(); }

private:
    void acquire_slot();
    void release_slot();
    void wait_for_rate_limit();

    std::shared_ptr<Provider> provider_;
    ClientOptions options_;
    std::optional<ResponseCache> cache_;
    std::atomic<long> network_calls_{0};
    std::atomic<long> cache_hits_{0};

    std::mutex slot_mutex_;
    std::condition_variable slot_cv_;
    int in_flight_ = 0;

    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point next_allowed_{};
};

} // namespace tristrat
