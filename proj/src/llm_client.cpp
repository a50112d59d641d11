#include "aeroloop/llm_client.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>

namespace aeroloop {

namespace {

using nlohmann::json;

std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t hash = 1469598103934665603ull;
    for (const unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

json request_body(const std::vector<ChatMessage>& messages, const ClientConfig& config) {
    json body;
    body["model"] = config.model_name;
    body["temperature"] = config.temperature;
    json msgs = json::array();
    for (const ChatMessage& m : messages) {
        if (m.content.empty())
            throw std::invalid_argument("complete: message content must be non-empty");
        msgs.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    return body;
}

struct SplitUrl {
    std::string origin;      // scheme://host[:port]
    std::string path_prefix; // e.g. "/v1"
};

SplitUrl split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("complete: base_url must include a scheme");
    const auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

std::optional<std::string> cache_lookup(const ClientConfig& config, const std::string& key,
                                        const json& body) {
    std::ifstream in(config.cache_path);
    if (!in) return std::nullopt;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json entry = json::parse(line, nullptr, false);
        if (entry.is_discarded()) continue;
        if (entry.value("key", "") != key) continue;
        if (entry.contains("request") && entry["request"] != body) continue; // hash collision
        if (entry.contains("response")) return entry["response"].get<std::string>();
    }
    return std::nullopt;
}

void cache_append(const ClientConfig& config, const std::string& key, const json& body,
                  const std::string& response) {
    std::ofstream out(config.cache_path, std::ios::app);
    if (!out) throw ClientError("complete: cannot open cache file " + config.cache_path);
    json entry;
    entry["key"] = key;
    entry["request"] = body;
    entry["response"] = response;
    entry["timestamp"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch()).count());
    out << entry.dump() << '\n';
}

std::string extract_content(const std::string& response_body) {
    const json reply = json::parse(response_body, nullptr, false);
    if (reply.is_discarded())
        throw MalformedResponseError("complete: response is not valid JSON");
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty())
        throw MalformedResponseError("complete: response has no choices");
    const json& message = reply["choices"][0].value("message", json::object());
    if (!message.contains("content") || !message["content"].is_string())
        throw MalformedResponseError("complete: first choice has no message content");
    return message["content"].get<std::string>();
}

bool is_timeout(httplib::Error err) {
    return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
           err == httplib::Error::Write;
}

} // namespace

std::string_view to_string(ChatRole role) {
    switch (role) {
        case ChatRole::System: return "system";
        case ChatRole::User: return "user";
        case ChatRole::Assistant: return "assistant";
    }
    return "?";
}

std::string request_key(const std::vector<ChatMessage>& messages, const ClientConfig& config) {
    return fnv1a64_hex(request_body(messages, config).dump());
}

std::string complete(const std::vector<ChatMessage>& messages, const ClientConfig& config) {
    if (!(config.timeout_s > 0.0))
        throw std::invalid_argument("complete: timeout must be > 0");

    const json body = request_body(messages, config);
    const std::string key = fnv1a64_hex(body.dump());

    if (config.cache_mode == CacheMode::Replay) {
        if (auto cached = cache_lookup(config, key, body)) return *cached;
        throw CacheMissError("complete: no cached response for key " + key);
    }

    const char* api_key = std::getenv(config.api_key_env_var.c_str());
    if (!api_key || !*api_key)
        throw MissingApiKeyError("complete: environment variable " + config.api_key_env_var +
                                 " is not set");

    const SplitUrl url = split_base_url(config.base_url);
    const std::string payload = body.dump();
    const int attempts = 1 + std::max(0, config.max_retries);

    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        httplib::Client client(url.origin);
        client.set_connection_timeout(std::chrono::duration<double>(config.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(config.timeout_s));
        client.set_write_timeout(std::chrono::duration<double>(config.timeout_s));
        httplib::Headers headers = {{"Authorization", std::string("Bearer ") + api_key}};

        auto result = client.Post(url.path_prefix + "/chat/completions", headers, payload,
                                  "application/json");
        if (!result) {
            if (is_timeout(result.error())) {
                last_error = "timeout (" + httplib::to_string(result.error()) + ")";
                continue; // retry
            }
            throw ClientError("complete: transport failure (" +
                              httplib::to_string(result.error()) + ")");
        }
        if (result->status >= 200 && result->status < 300) {
            std::string content = extract_content(result->body);
            if (config.cache_mode == CacheMode::Record)
                cache_append(config, key, body, content);
            return content;
        }
        if (result->status >= 500) {
            last_error = "server status " + std::to_string(result->status);
            continue; // retry
        }
        throw HttpStatusError(result->status,
                              "complete: request rejected with status " +
                                  std::to_string(result->status));
    }
    if (last_error.rfind("timeout", 0) == 0)
        throw TimeoutError("complete: " + last_error + " after " + std::to_string(attempts) +
                           " attempts");
    throw HttpStatusError(500, "complete: " + last_error + " after " + std::to_string(attempts) +
                                   " attempts");
}

} // namespace aeroloop
