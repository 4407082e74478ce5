#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "archrecon/gateway.hpp"
#include "detail/json_util.hpp"

namespace archrecon {

using detail::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorKind::Config, "ARCH_LLM_BASE_URL must include http:// or https://: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  e.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  split_url(config_.base_url);
  if (config_.model.empty()) throw Error(ErrorKind::Config, "HTTP backend needs a model name");
}

std::string HttpBackend::complete(const LlmRequest& req) {
  const auto ep = split_url(config_.base_url);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(std::chrono::seconds(60));

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const json body = {
      {"model", config_.model},
      {"messages",
       json::array({{{"role", "system"}, {"content", req.system_prompt}},
                    {{"role", "user"}, {"content", req.user_content}}})},
      {"max_tokens", req.max_output_tokens},
      {"temperature", req.temperature},
  };
  auto res = client.Post(ep.path + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw TransientError("request failed: " + httplib::to_string(res.error()));
  const int status = res->status;
  if (status == 401 || status == 403)
    throw Error(ErrorKind::Auth, "backend rejected credentials (HTTP " + std::to_string(status) + ")");
  if (status == 408 || status == 429 || status >= 500)
    throw TransientError("HTTP " + std::to_string(status));
  if (status != 200)
    throw Error(ErrorKind::BackendUnavailable,
                "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 500));
  try {
    const auto j = json::parse(res->body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_string() ? content.get<std::string>() : std::string();
  } catch (const json::exception& e) {
    throw TransientError(std::string("malformed completion response: ") + e.what());
  }
}

}  // namespace archrecon
