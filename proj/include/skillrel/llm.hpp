#pragma once

#include <mutex>
#include <string>

namespace skillrel {

// Remote completion endpoint. The request/response shape is chosen by
// `adapter`:
//   simple       POST {base_url}/complete  {"model","system","prompt"}
//                -> {"completion": "..."}
//   openai_chat  POST {base_url}/v1/chat/completions with system+user
//                messages -> choices[0].message.content
// Auth token, when used, is read from the environment variable named in
// auth_env and sent as a bearer token.
struct EndpointConfig {
  std::string base_url;
  std::string model;
  std::string auth_env;
  std::string adapter = "simple";
  double timeout_seconds = 30.0;
  double rate_limit_rps = 5.0;
  int concurrency = 4;
  int max_retries = 3;
  int backoff_base_ms = 500;
  int backoff_cap_ms = 8000;

  void validate() const;  // throws config-error
};

// Token bucket limiter. Pure arithmetic on a caller-supplied clock so the
// refill logic is testable without sleeping.
class TokenBucket {
 public:
  TokenBucket(double rate_per_sec, double burst);

  bool try_acquire(double now_seconds);
  double seconds_until_available(double now_seconds) const;

 private:
  void refill(double now_seconds);

  double rate_;
  double burst_;
  double tokens_;
  double last_seconds_;
};

// Blocking completion client: rate-limited, retried with exponential
// backoff on transport failures, 429 and 5xx. 401/403 raise an auth error
// immediately. Safe to call from multiple threads.
class LlmClient {
 public:
  explicit LlmClient(EndpointConfig cfg);  // throws auth/config errors

  std::string complete(const std::string& system, const std::string& prompt);

  const EndpointConfig& config() const { return cfg_; }

 private:
  std::string post_once(const std::string& system, const std::string& prompt);

  EndpointConfig cfg_;
  std::string token_;
  TokenBucket bucket_;
  std::mutex bucket_mu_;
};

}  // namespace skillrel
