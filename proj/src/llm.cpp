#include "skillrel/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "skillrel/error.hpp"

namespace skillrel {

namespace {

using nlohmann::json;

double monotonic_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

void EndpointConfig::validate() const {
  if (base_url.empty()) throw config_error("endpoint base_url is empty");
  if (adapter != "simple" && adapter != "openai_chat")
    throw config_error("unknown endpoint adapter '" + adapter + "'");
  if (timeout_seconds <= 0) throw config_error("timeout_seconds must be positive");
  if (rate_limit_rps <= 0) throw config_error("rate_limit_rps must be positive");
  if (concurrency < 1) throw config_error("concurrency must be >= 1");
  if (max_retries < 0) throw config_error("max_retries must be >= 0");
}

TokenBucket::TokenBucket(double rate_per_sec, double burst)
    : rate_(rate_per_sec), burst_(burst), tokens_(burst), last_seconds_(0.0) {}

void TokenBucket::refill(double now_seconds) {
  if (now_seconds <= last_seconds_) return;
  tokens_ = std::min(burst_, tokens_ + (now_seconds - last_seconds_) * rate_);
  last_seconds_ = now_seconds;
}

bool TokenBucket::try_acquire(double now_seconds) {
  refill(now_seconds);
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

double TokenBucket::seconds_until_available(double now_seconds) const {
  TokenBucket probe = *this;
  probe.refill(now_seconds);
  if (probe.tokens_ >= 1.0) return 0.0;
  return (1.0 - probe.tokens_) / rate_;
}

LlmClient::LlmClient(EndpointConfig cfg)
    : cfg_(std::move(cfg)), bucket_(cfg_.rate_limit_rps, std::max(1.0, cfg_.rate_limit_rps)) {
  cfg_.validate();
  if (!cfg_.auth_env.empty()) {
    const char* v = std::getenv(cfg_.auth_env.c_str());
    if (!v || !*v)
      throw auth_error("auth environment variable '" + cfg_.auth_env + "' is not set");
    token_ = v;
  }
}

std::string LlmClient::post_once(const std::string& system, const std::string& prompt) {
  httplib::Client client(cfg_.base_url);
  const auto whole = std::chrono::duration<double>(cfg_.timeout_seconds);
  client.set_connection_timeout(whole);
  client.set_read_timeout(whole);
  client.set_write_timeout(whole);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  std::string path;
  json body;
  if (cfg_.adapter == "simple") {
    path = "/complete";
    body = {{"model", cfg_.model}, {"system", system}, {"prompt", prompt}};
  } else {
    path = "/v1/chat/completions";
    body = {{"model", cfg_.model},
            {"temperature", 0},
            {"messages", json::array({json{{"role", "system"}, {"content", system}},
                                      json{{"role", "user"}, {"content", prompt}}})}};
  }

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw endpoint_error("transport failure: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403)
    throw auth_error("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
  if (retryable_status(res->status))
    throw endpoint_error("HTTP " + std::to_string(res->status));
  if (res->status != 200)
    throw extraction_error("unexpected HTTP " + std::to_string(res->status) + ": " + res->body);

  json rep = json::parse(res->body, nullptr, false);
  if (cfg_.adapter == "simple") {
    if (!rep.is_object() || !rep.contains("completion") || !rep["completion"].is_string())
      throw extraction_error("response missing completion field: " + res->body);
    return rep["completion"].get<std::string>();
  }
  if (!rep.is_object() || !rep.contains("choices") || !rep["choices"].is_array() ||
      rep["choices"].empty())
    throw extraction_error("response missing choices: " + res->body);
  const auto& msg = rep["choices"][0];
  if (!msg.contains("message") || !msg["message"].contains("content") ||
      !msg["message"]["content"].is_string())
    throw extraction_error("response missing message content: " + res->body);
  return msg["message"]["content"].get<std::string>();
}

std::string LlmClient::complete(const std::string& system, const std::string& prompt) {
  for (int attempt = 0;; ++attempt) {
    {
      std::unique_lock<std::mutex> lock(bucket_mu_);
      while (!bucket_.try_acquire(monotonic_seconds())) {
        const double wait = bucket_.seconds_until_available(monotonic_seconds());
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        lock.lock();
      }
    }
    try {
      return post_once(system, prompt);
    } catch (const Error& e) {
      const bool retryable = e.category() == std::string("endpoint-error");
      if (!retryable || attempt >= cfg_.max_retries) throw;
      const double backoff_ms = std::min<double>(
          cfg_.backoff_cap_ms, static_cast<double>(cfg_.backoff_base_ms) * (1 << attempt));
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(backoff_ms));
    }
  }
}

}  // namespace skillrel
