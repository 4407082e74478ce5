#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include "archrecon/error.hpp"

namespace archrecon {

struct LlmRequest {
  std::string system_prompt;
  std::string user_content;
  std::uint32_t max_output_tokens = 1024;
  double temperature = 0.0;
};

struct LlmResponse {
  std::string text;
  bool cached = false;
  std::string backend_id;
};

// Thrown by backends for failures worth retrying (timeouts, 429, 5xx).
class TransientError : public Error {
public:
  explicit TransientError(const std::string& message)
      : Error(ErrorKind::BackendUnavailable, message) {}
};

class Backend {
public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Part of the cache key; backends without a model name return id().
  virtual std::string model() const { return id(); }
  virtual std::uint64_t context_tokens() const = 0;
  virtual std::string complete(const LlmRequest& req) = 0;
};

// Deterministic offline backend. The task is named by a "[task:<tag>]"
// marker on the first line of the system prompt; see prompt.hpp for the
// user-content sections each task reads.
class MockBackend : public Backend {
public:
  explicit MockBackend(std::uint64_t context_tokens = 128000) : context_(context_tokens) {}

  std::string id() const override { return "mock"; }
  std::uint64_t context_tokens() const override { return context_; }
  std::string complete(const LlmRequest& req) override;

private:
  std::uint64_t context_;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;
  std::uint64_t context_tokens = 128000;
  std::chrono::seconds timeout{600};
};

// OpenAI-compatible chat-completions endpoint ({base_url}/chat/completions).
class HttpBackend : public Backend {
public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string id() const override { return "http:" + config_.model; }
  std::string model() const override { return config_.model; }
  std::uint64_t context_tokens() const override { return config_.context_tokens; }
  std::string complete(const LlmRequest& req) override;

private:
  HttpBackendConfig config_;
};

// Reads ARCH_LLM_BASE_URL, ARCH_LLM_MODEL, ARCH_LLM_API_KEY and
// ARCH_LLM_CONTEXT_TOKENS. Throws Error{Config} when base URL or model is
// missing.
HttpBackendConfig http_config_from_env();

struct GatewayConfig {
  std::filesystem::path cache_dir;  // empty disables the disk cache
  unsigned concurrency = 4;
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double backoff_factor = 2.0;
  std::function<void(std::chrono::milliseconds)> sleeper;  // defaults to sleep_for
};

// ARCH_LLM_CONCURRENCY, when set, overrides `fallback`.
unsigned concurrency_from_env(unsigned fallback);

class Gateway {
public:
  Gateway(std::shared_ptr<Backend> backend, GatewayConfig config = {});

  // Throws Error{ContextOverflow} before dispatch when the prompt does not
  // fit, Error{Auth} on rejected credentials and Error{BackendUnavailable}
  // once retries are exhausted.
  LlmResponse complete(const LlmRequest& req);

  // Hex SHA-256 over every request field plus the backend model.
  std::string cache_key(const LlmRequest& req) const;

  std::uint64_t context_tokens() const { return backend_->context_tokens(); }
  unsigned concurrency() const { return config_.concurrency; }
  const Backend& backend() const { return *backend_; }

  std::uint64_t calls() const { return calls_.load(); }
  std::uint64_t cache_hits() const { return hits_.load(); }

private:
  std::optional<std::string> cache_read(const std::string& key) const;
  void cache_write(const std::string& key, const LlmResponse& resp) const;

  std::shared_ptr<Backend> backend_;
  GatewayConfig config_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> hits_{0};
};

}  // namespace archrecon
