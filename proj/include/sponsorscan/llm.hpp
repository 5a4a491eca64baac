#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sponsorscan/prompts.hpp"

namespace sponsorscan {

struct ChatRequest {
  std::string model_id = "gpt-4o-2024-08-06";
  std::string system;
  std::string user;       // must be non-empty
  double temperature = 0.0;  // [0, 2]
};

enum class FinishReason { Stop, Length, ContentFilter, Other };

const char* finish_reason_name(FinishReason reason);
FinishReason finish_reason_from_name(const std::string& name);

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::Stop;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

// Collision-resistant digest over (model_id, temperature, system, user);
// equal inputs give equal keys, any field change gives a different key.
std::string cache_key(const ChatRequest& req);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
  virtual std::string name() const = 0;
};

// Deterministic offline backend, a pure function of the request.
//  - ad prompts: echoes the contiguous runs of transcript records whose text
//    contains any marker phrase, in the record-list shape; "None" otherwise
//  - grouping prompts: buckets each keyword under its first token
class MockBackend : public LlmBackend {
 public:
  MockBackend(PromptTemplates templates, std::vector<std::string> markers = default_markers());
  static std::vector<std::string> default_markers();

  ChatResponse complete(const ChatRequest& req) override;
  std::string name() const override { return "mock"; }

 private:
  PromptTemplates templates_;
  std::vector<std::string> markers_;
};

struct RemoteConfig {
  std::string api_base = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_s = 120;
};

// OpenAI-compatible chat-completions client. Transient failures (connect,
// timeout, 408/429/5xx) surface as Error(BackendUnavailable) per attempt;
// 401/403 as AuthError; context-length rejections as ContextTooLong.
class RemoteBackend : public LlmBackend {
 public:
  explicit RemoteBackend(RemoteConfig cfg);
  ChatResponse complete(const ChatRequest& req) override;
  std::string name() const override { return "remote"; }

 private:
  RemoteConfig cfg_;
};

// Disk cache, one JSON file per CacheKey holding the full request and
// response. Writes are write-temp-then-rename; entries are never evicted.
class ResponseCache {
 public:
  explicit ResponseCache(std::string dir);
  std::optional<ChatResponse> get(const std::string& key) const;
  void put(const std::string& key, const ChatRequest& req, const ChatResponse& resp) const;
  const std::string& dir() const { return dir_; }

 private:
  std::string path_for(const std::string& key) const;
  std::string dir_;
};

struct RetryPolicy {
  int max_attempts = 4;
  int base_delay_ms = 500;
  double backoff = 2.0;
};

struct RateLimit {
  int requests_per_minute = 0;  // 0 = unlimited
  int max_inflight = 4;
};

struct GatewayStats {
  std::atomic<long> backend_calls{0};
  std::atomic<long> cache_hits{0};
  std::atomic<long> retries{0};
  std::atomic<int> inflight{0};
  std::atomic<int> max_inflight_seen{0};
};

// Serializes access policy in front of a backend: cache lookup, bounded
// retries with exponential backoff on transient failures, a token-bucket
// rate limit, and an in-flight cap. Safe for concurrent callers.
class Gateway {
 public:
  Gateway(LlmBackend& backend, ResponseCache* cache, RetryPolicy retry = {}, RateLimit limit = {});

  // bypass_cache skips the lookup (the fresh response still overwrites the
  // entry) — used for the one-shot reparse retry on garbled replies.
  // from_cache, when given, reports whether the response was a cache hit.
  ChatResponse complete_cached(const ChatRequest& req, bool bypass_cache = false,
                               bool* from_cache = nullptr);

  const GatewayStats& stats() const { return stats_; }
  LlmBackend& backend() { return backend_; }

 private:
  void acquire_rate_token();

  LlmBackend& backend_;
  ResponseCache* cache_;
  RetryPolicy retry_;
  RateLimit limit_;
  GatewayStats stats_;

  std::mutex bucket_mutex_;
  double bucket_tokens_ = 0;
  std::chrono::steady_clock::time_point bucket_refill_{};

  std::mutex inflight_mutex_;
  std::condition_variable inflight_cv_;
  int inflight_count_ = 0;
};

}  // namespace sponsorscan
