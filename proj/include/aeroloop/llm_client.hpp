#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aeroloop {

enum class ChatRole { System, User, Assistant };

std::string_view to_string(ChatRole role);

struct ChatMessage {
    ChatRole role = ChatRole::User;
    std::string content; // non-empty
};

enum class CacheMode { Off, Record, Replay };

struct ClientConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model_name = "gpt-4";
    double temperature = 0.0;
    double timeout_s = 30.0;
    int max_retries = 2; // total attempts = 1 + max_retries
    std::string api_key_env_var = "OPENAI_API_KEY";
    CacheMode cache_mode = CacheMode::Off;
    std::string cache_path = "llm_cache.jsonl";
};

class ClientError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class TimeoutError : public ClientError {
    using ClientError::ClientError;
};
class HttpStatusError : public ClientError {
public:
    HttpStatusError(int status_code, const std::string& what)
        : ClientError(what), status(status_code) {}
    int status = 0;
};
class MalformedResponseError : public ClientError {
    using ClientError::ClientError;
};
class CacheMissError : public ClientError {
    using ClientError::ClientError;
};
class MissingApiKeyError : public ClientError {
    using ClientError::ClientError;
};

/// Stable content hash of (model, temperature, message list); order- and
/// content-sensitive. Used as the record/replay cache key.
std::string request_key(const std::vector<ChatMessage>& messages, const ClientConfig& config);

/// POSTs {model, messages, temperature} to <base_url>/chat/completions
/// with bearer auth from the configured environment variable and returns
/// the first choice's message content. Retries only on timeout/5xx, up
/// to max_retries extra attempts. In record mode every response is
/// appended to the cache file; in replay mode responses come from the
/// cache alone and the network is never touched. The API key is read
/// from the environment and never written to the cache or any log.
std::string complete(const std::vector<ChatMessage>& messages, const ClientConfig& config);

} // namespace aeroloop
