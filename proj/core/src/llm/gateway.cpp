#include "archrecon/gateway.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "archrecon/repo_model.hpp"
#include "detail/hash.hpp"
#include "detail/json_util.hpp"
#include "detail/text.hpp"

namespace archrecon {

using detail::json;
using detail::sha256_hex;

namespace {

void append_field(std::string& buf, std::string_view field) {
  buf += std::to_string(field.size());
  buf += ':';
  buf += field;
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::uint64_t parse_positive(const std::string& text, const char* name) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used == text.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, std::string(name) + " must be a positive integer, got '" + text + "'");
}

}  // namespace

HttpBackendConfig http_config_from_env() {
  HttpBackendConfig c;
  auto base = env("ARCH_LLM_BASE_URL");
  auto model = env("ARCH_LLM_MODEL");
  if (!base || !model)
    throw Error(ErrorKind::Config,
                "ARCH_LLM_BASE_URL and ARCH_LLM_MODEL must be set (or use --mock)");
  c.base_url = *base;
  c.model = *model;
  c.api_key = env("ARCH_LLM_API_KEY").value_or("");
  if (auto ctx = env("ARCH_LLM_CONTEXT_TOKENS"))
    c.context_tokens = parse_positive(*ctx, "ARCH_LLM_CONTEXT_TOKENS");
  return c;
}

unsigned concurrency_from_env(unsigned fallback) {
  if (auto v = env("ARCH_LLM_CONCURRENCY"))
    return static_cast<unsigned>(parse_positive(*v, "ARCH_LLM_CONCURRENCY"));
  return fallback;
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayConfig config)
    : backend_(std::move(backend)), config_(std::move(config)) {
  if (!backend_) throw Error(ErrorKind::Config, "gateway needs a backend");
  if (config_.concurrency == 0) config_.concurrency = 1;
  if (config_.max_attempts < 1) config_.max_attempts = 1;
  if (!config_.sleeper)
    config_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  slots_ = std::make_unique<std::counting_semaphore<>>(config_.concurrency);
  if (!config_.cache_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config_.cache_dir, ec);
    if (ec)
      throw Error(ErrorKind::Io, "cannot create cache directory " + config_.cache_dir.string() +
                                     ": " + ec.message());
  }
}

std::string Gateway::cache_key(const LlmRequest& req) const {
  std::string buf = "archrecon-cache-v1\n";
  append_field(buf, req.system_prompt);
  append_field(buf, req.user_content);
  append_field(buf, backend_->model());
  append_field(buf, std::to_string(req.max_output_tokens));
  append_field(buf, detail::format_decimal(req.temperature));
  return sha256_hex(buf);
}

std::optional<std::string> Gateway::cache_read(const std::string& key) const {
  if (config_.cache_dir.empty()) return std::nullopt;
  std::ifstream in(config_.cache_dir / (key + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    const auto j = json::parse(ss.str());
    if (j.at("version") != 1) return std::nullopt;
    auto text = j.at("text").get<std::string>();
    if (text.empty()) return std::nullopt;
    return text;
  } catch (const json::exception&) {
    return std::nullopt;  // torn or foreign file: treat as a miss
  }
}

void Gateway::cache_write(const std::string& key, const LlmResponse& resp) const {
  if (config_.cache_dir.empty()) return;
  static std::atomic<std::uint64_t> counter{0};
  const auto final_path = config_.cache_dir / (key + ".json");
  const auto tmp = config_.cache_dir / (key + "." + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter.fetch_add(1)) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << json{{"version", 1}, {"backend_id", resp.backend_id}, {"text", resp.text}}.dump();
    if (!out) throw Error(ErrorKind::Io, "cannot write cache entry " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot publish cache entry " + final_path.string());
  }
}

LlmResponse Gateway::complete(const LlmRequest& req) {
  const auto need = token_estimate(req.system_prompt) + token_estimate(req.user_content);
  if (need > backend_->context_tokens())
    throw Error(ErrorKind::ContextOverflow,
                "prompt needs ~" + std::to_string(need) + " tokens, backend limit is " +
                    std::to_string(backend_->context_tokens()));

  const auto key = cache_key(req);
  if (auto hit = cache_read(key)) {
    ++hits_;
    return {std::move(*hit), true, backend_->id()};
  }

  std::string text;
  std::string last_error;
  {
    slots_->acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{*slots_};
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
      ++calls_;
      try {
        text = backend_->complete(req);
        if (!text.empty()) break;
        last_error = "empty response";
      } catch (const TransientError& e) {
        last_error = e.what();
      }
      if (attempt == config_.max_attempts) break;
      const auto delay = config_.base_delay.count() * std::pow(config_.backoff_factor, attempt - 1);
      config_.sleeper(std::chrono::milliseconds(static_cast<long long>(delay)));
    }
  }
  if (text.empty())
    throw Error(ErrorKind::BackendUnavailable,
                backend_->id() + " failed after " + std::to_string(config_.max_attempts) +
                    " attempts: " + last_error);

  LlmResponse resp{std::move(text), false, backend_->id()};
  cache_write(key, resp);
  return resp;
}

}  // namespace archrecon
