#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tristrat/chat.hpp"

namespace tristrat {

/// Deterministic stand-in for a chat-completion endpoint.
///
/// Lookup order for each request:
///   1. `hash:<cache key>` entries (a single canned reply),
///   2. `<role>/<stock>/<week>` scripts, where `stock` is empty for the
///      selector and strategy roles; the n-th call on a key gets the n-th
///      reply, the last reply repeating once the script runs out,
///   3. the fallback responder (by default a hash-seeded mock analyst).
class StubProvider : public Provider {
public:
    using Responder = std::function<std::string(const ChatRequest&)>;

    StubProvider();

    /// Adds scripts from a JSON object of key -> reply or key -> [replies].
    void load_script(const std::filesystem::path& path);

    void script(const std::string& key, std::vector<std::string> replies);
    void set_fallback(Responder responder) { fallback_ = std::move(responder); }
    /// The next `count` sends throw TransportError.
    void inject_transport_failures(int count);

    std::string send(const ChatRequest& request) override;
    std::string id() const override { return "stub"; }

    long calls() const;
    std::vector<ChatRequest> requests() const;

    static std::string script_key(const CallTag& tag);

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> scripts_;
    std::map<std::string, std::size_t> cursor_;
    Responder fallback_;
    int pending_failures_ = 0;
    long calls_ = 0;
    std::vector<ChatRequest> requests_;
};

/// The default fallback: role-shaped, deterministic replies seeded by a hash
/// of (role, stock, week).
std::string mock_analyst_reply(const ChatRequest& request);

} // namespace tristrat
