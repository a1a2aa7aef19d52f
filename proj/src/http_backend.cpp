#include "selfverify/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "selfverify/errors.hpp"

namespace selfverify {

using nlohmann::json;

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const char* key = std::getenv(options_.api_key_env);
  if (!key || !*key)
    throw AuthError(std::string("missing API key: set ") + options_.api_key_env);
  api_key_ = key;

  const std::string& ep = options_.endpoint;
  size_t scheme_end = ep.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("endpoint must start with http:// — got: " + ep);
  size_t path_start = ep.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    origin_ = ep;
  } else {
    origin_ = ep.substr(0, path_start);
    base_path_ = ep.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (ep.rfind("https://", 0) == 0)
    throw ConfigError("this build was compiled without TLS; use an http:// endpoint");
#endif
}

GenerationResponse HttpBackend::generate(const GenerationRequest& req) {
  json body;
  body["model"] = options_.model;
  body["prompt"] = req.prompt;
  body["n"] = req.n;
  body["max_tokens"] = req.max_tokens;
  body["temperature"] = req.temperature;
  if (!req.stop.empty()) body["stop"] = req.stop;
  std::string payload = body.dump();
  std::string url = base_path_ + "/completions";

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(options_.backoff_ms) << (attempt - 1)));
    }
    // One client per request keeps this trivially thread-safe.
    httplib::Client client(origin_);
    client.set_read_timeout(options_.timeout_s, 0);
    client.set_connection_timeout(10, 0);
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(url, headers, payload, "application/json");

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;  // retryable
    }
    if (res->status == 401 || res->status == 403)
      throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;  // retryable
    }
    if (res->status < 200 || res->status >= 300)
      throw ContractError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                          res->body.substr(0, 200));

    json parsed;
    try {
      parsed = json::parse(res->body);
    } catch (const json::exception& e) {
      throw ContractError(std::string("unparseable completion response: ") + e.what());
    }
    GenerationResponse resp;
    resp.model_id = options_.model;
    if (!parsed.contains("choices") || !parsed["choices"].is_array())
      throw ContractError("completion response has no choices array");
    for (const auto& choice : parsed["choices"])
      resp.completions.push_back(choice.at("text").get<std::string>());
    if (static_cast<int>(resp.completions.size()) < req.n)
      throw ContractError("endpoint returned " + std::to_string(resp.completions.size()) +
                          " completions, requested " + std::to_string(req.n));
    resp.completions.resize(size_t(req.n));
    return resp;
  }
  throw TransportError("request failed after " + std::to_string(options_.retries + 1) +
                       " attempts; last error: " + last_error);
}

}  // namespace selfverify
