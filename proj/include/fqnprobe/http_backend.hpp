#pragma once

// HTTP completion-endpoint client: single POST per request with bounded
// retries and bounded concurrency. Kept in its own header so only the CLI
// and the HTTP tests pay for the httplib include.

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "fqnprobe/backend.hpp"

namespace fqnprobe {

inline constexpr std::string_view kApiKeyEnvVar = "FQN_PROBE_API_KEY";

struct HttpBackendConfig {
  std::string base_url;             ///< e.g. http://localhost:8080
  std::string path = "/v1/completions";
  int timeout_ms = 30000;
  int retries = 2;                  ///< at most retries+1 attempts
  int concurrency = 1;
  /// Auth is on when the header name is non-empty; the key comes from
  /// FQN_PROBE_API_KEY and the scheme prefixes it ("Bearer <key>").
  std::string auth_header;
  std::string auth_scheme = "Bearer";
};

namespace detail {

/// Counting semaphore bounding in-flight requests.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int slots) : slots_(slots < 1 ? 1 : slots) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int slots_;
};

struct SlotGuard {
  ConcurrencyLimiter& limiter;
  explicit SlotGuard(ConcurrencyLimiter& l) : limiter(l) { limiter.acquire(); }
  ~SlotGuard() { limiter.release(); }
};

}  // namespace detail

/// POSTs {prompt, max_tokens, stop} and takes the first choice's text
/// verbatim. Empty or missing completion text maps to NoCompletion.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config)
      : config_(std::move(config)), limiter_(config_.concurrency) {
    if (config_.base_url.empty()) throw BackendError("http backend: base_url is required");
    if (!config_.auth_header.empty()) {
      const char* key = std::getenv(std::string(kApiKeyEnvVar).c_str());
      if (!key || !*key) {
        throw AuthError("http backend: auth header configured but " +
                        std::string(kApiKeyEnvVar) + " is not set");
      }
      api_key_ = key;
    }
  }

  CompletionResult complete(const CompletionRequest& request) override {
    detail::SlotGuard slot(limiter_);
    nlohmann::ordered_json body;
    body["prompt"] = request.text;
    body["max_tokens"] = request.max_new_tokens;
    body["stop"] = request.stop_sequences;
    const std::string payload = body.dump();

    const auto started = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::steady_clock::now() - started)
          .count();
    };

    std::string last_error;
    bool timed_out = false;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
      httplib::Client client(config_.base_url);
      client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
      client.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
      client.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));
      httplib::Headers headers;
      if (!config_.auth_header.empty()) {
        const std::string value =
            config_.auth_scheme.empty() ? api_key_ : config_.auth_scheme + " " + api_key_;
        headers.emplace(config_.auth_header, value);
      }

      auto response = client.Post(config_.path, headers, payload, "application/json");
      if (!response) {
        const auto err = response.error();
        timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                    err == httplib::Error::Write;
        last_error = httplib::to_string(err);
        continue;  // transport/timeout: retryable
      }
      if (response->status == 401 || response->status == 403) {
        throw AuthError("http backend: authentication failed with status " +
                        std::to_string(response->status));
      }
      if (response->status == 429 || response->status >= 500) {
        last_error = "status " + std::to_string(response->status);
        timed_out = false;
        continue;  // retryable server-side failure
      }
      if (response->status != 200) {
        throw BackendError("http backend: unexpected status " +
                           std::to_string(response->status));
      }
      return parse_completion(response->body, elapsed_ms());
    }
    const std::string detail = " after " + std::to_string(config_.retries + 1) +
                               " attempts: " + last_error;
    if (timed_out) throw TimeoutError("http backend: timed out" + detail);
    throw TransportError("http backend: transport failure" + detail);
  }

  const HttpBackendConfig& config() const { return config_; }

 private:
  static CompletionResult parse_completion(const std::string& body, std::int64_t latency_ms) {
    try {
      const auto obj = nlohmann::json::parse(body);
      if (!obj.contains("choices") || !obj["choices"].is_array() || obj["choices"].empty()) {
        return CompletionResult::no_completion(latency_ms);
      }
      const auto& choice = obj["choices"].front();
      if (!choice.contains("text") || !choice["text"].is_string()) {
        return CompletionResult::no_completion(latency_ms);
      }
      return CompletionResult::from_text(choice["text"].get<std::string>(), latency_ms);
    } catch (const nlohmann::json::exception&) {
      return CompletionResult::no_completion(latency_ms);
    }
  }

  HttpBackendConfig config_;
  std::string api_key_;
  detail::ConcurrencyLimiter limiter_;
};

}  // namespace fqnprobe
