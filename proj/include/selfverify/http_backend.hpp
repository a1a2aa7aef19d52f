#pragma once

// OpenAI-compatible /completions backend. Credentials come from the
// SELFVERIFY_API_KEY environment variable; transport failures and 5xx
// responses are retried with exponential backoff, 4xx responses are not.

#include <string>

#include "selfverify/backend.hpp"

namespace selfverify {

struct HttpBackendOptions {
  std::string endpoint;  // e.g. "http://localhost:8000/v1"
  std::string model;
  int retries = 3;          // attempts beyond the first
  int backoff_ms = 1000;    // first retry delay; doubles each retry
  int timeout_s = 120;      // per-request read timeout
  const char* api_key_env = "SELFVERIFY_API_KEY";
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);  // AuthError if the key is absent

  GenerationResponse generate(const GenerationRequest& req) override;
  std::string model_id() const override { return options_.model; }

 private:
  HttpBackendOptions options_;
  std::string api_key_;
  std::string origin_;     // scheme://host[:port]
  std::string base_path_;  // path prefix, no trailing slash
};

}  // namespace selfverify
