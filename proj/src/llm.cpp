#include "sponsorscan/llm.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <thread>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/log.hpp"
#include "sponsorscan/util.hpp"

using nlohmann::json;

namespace sponsorscan {

const char* finish_reason_name(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::ContentFilter: return "content_filter";
    case FinishReason::Other: return "other";
  }
  return "other";
}

FinishReason finish_reason_from_name(const std::string& name) {
  if (name == "stop") return FinishReason::Stop;
  if (name == "length") return FinishReason::Length;
  if (name == "content_filter") return FinishReason::ContentFilter;
  return FinishReason::Other;
}

std::string cache_key(const ChatRequest& req) {
  // length-prefixed concatenation so field boundaries cannot collide
  auto field = [](const std::string& s) { return std::to_string(s.size()) + ":" + s; };
  std::string canon = "chat\n";
  canon += field(req.model_id);
  canon += field(format_fixed(req.temperature, 6));
  canon += field(req.system);
  canon += field(req.user);
  return sha256_hex(canon);
}

// ---- MockBackend ----

std::vector<std::string> MockBackend::default_markers() {
  return {"sponsored by", "use code", "check out our sponsor"};
}

MockBackend::MockBackend(PromptTemplates templates, std::vector<std::string> markers)
    : templates_(std::move(templates)), markers_(std::move(markers)) {
  for (auto& m : markers_) m = to_lower(m);
}

ChatResponse MockBackend::complete(const ChatRequest& req) {
  ChatResponse resp;
  resp.prompt_tokens = static_cast<long>(req.user.size() / 4);

  if (starts_with(req.user, templates_.group_prompt)) {
    std::string payload = req.user.substr(templates_.group_prompt.size());
    std::vector<std::string> groups;
    for (const auto& line : split_lines(payload)) {
      std::string keyword = trim(line);
      if (keyword.empty()) continue;
      auto tokens = split_ws(keyword);
      std::string bucket = to_lower(tokens.front());
      bool seen = false;
      for (const auto& g : groups)
        if (g == bucket) seen = true;
      if (!seen) groups.push_back(bucket);
    }
    resp.content = "[" + join(groups, ", ") + "]";
  } else if (starts_with(req.user, templates_.ad_prompt)) {
    std::string payload = req.user.substr(templates_.ad_prompt.size());
    RecordListReply transcript = parse_llm_record_list(payload);
    std::vector<LlmRecord> hits;
    for (const auto& rec : transcript.records) {
      std::string lower = to_lower(rec.text);
      bool marked = false;
      for (const auto& marker : markers_)
        if (lower.find(marker) != std::string::npos) marked = true;
      if (marked) hits.push_back(rec);
    }
    resp.content = hits.empty() ? "None" : serialize_record_list(hits);
  } else {
    resp.content = "None";
  }

  resp.completion_tokens = static_cast<long>(resp.content.size() / 4);
  return resp;
}

// ---- ResponseCache ----

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) { ensure_dir(dir_); }

std::string ResponseCache::path_for(const std::string& key) const {
  return (std::filesystem::path(dir_) / (key + ".json")).string();
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
  std::string path = path_for(key);
  if (!file_exists(path)) return std::nullopt;
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.contains("response")) {
    logging::warn("ignoring malformed cache entry " + path);
    return std::nullopt;
  }
  const json& r = doc["response"];
  ChatResponse resp;
  resp.content = r.value("content", "");
  resp.finish_reason = finish_reason_from_name(r.value("finish_reason", "stop"));
  resp.prompt_tokens = r.value("prompt_tokens", 0L);
  resp.completion_tokens = r.value("completion_tokens", 0L);
  return resp;
}

void ResponseCache::put(const std::string& key, const ChatRequest& req,
                        const ChatResponse& resp) const {
  nlohmann::ordered_json doc;
  doc["request"] = {{"model_id", req.model_id},
                    {"temperature", req.temperature},
                    {"system", req.system},
                    {"user", req.user}};
  doc["response"] = {{"content", resp.content},
                     {"finish_reason", finish_reason_name(resp.finish_reason)},
                     {"prompt_tokens", resp.prompt_tokens},
                     {"completion_tokens", resp.completion_tokens}};
  atomic_write_file(path_for(key), doc.dump(2) + "\n");
}

// ---- Gateway ----

Gateway::Gateway(LlmBackend& backend, ResponseCache* cache, RetryPolicy retry, RateLimit limit)
    : backend_(backend), cache_(cache), retry_(retry), limit_(limit) {
  bucket_tokens_ = limit_.requests_per_minute > 0 ? 1.0 : 0.0;
  bucket_refill_ = std::chrono::steady_clock::now();
}

void Gateway::acquire_rate_token() {
  if (limit_.requests_per_minute <= 0) return;
  const double rate_per_s = limit_.requests_per_minute / 60.0;
  const double capacity = std::max(1.0, limit_.requests_per_minute / 60.0);
  std::unique_lock<std::mutex> lock(bucket_mutex_);
  while (true) {
    auto now = std::chrono::steady_clock::now();
    double elapsed = std::chrono::duration<double>(now - bucket_refill_).count();
    bucket_refill_ = now;
    bucket_tokens_ = std::min(capacity, bucket_tokens_ + elapsed * rate_per_s);
    if (bucket_tokens_ >= 1.0) {
      bucket_tokens_ -= 1.0;
      return;
    }
    double wait_s = (1.0 - bucket_tokens_) / rate_per_s;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
    lock.lock();
  }
}

ChatResponse Gateway::complete_cached(const ChatRequest& req, bool bypass_cache,
                                      bool* from_cache) {
  if (trim(req.user).empty()) raise(Errc::Precondition, "chat request has empty user message");
  if (req.temperature < 0.0 || req.temperature > 2.0)
    raise(Errc::InvalidConfig, "temperature out of [0,2]: " + format_fixed(req.temperature, 3));

  if (from_cache) *from_cache = false;
  std::string key = cache_key(req);
  if (cache_ && !bypass_cache) {
    if (auto hit = cache_->get(key)) {
      stats_.cache_hits.fetch_add(1);
      if (from_cache) *from_cache = true;
      return *hit;
    }
  }

  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    acquire_rate_token();
    {
      std::unique_lock<std::mutex> lock(inflight_mutex_);
      inflight_cv_.wait(lock, [&] { return inflight_count_ < limit_.max_inflight; });
      ++inflight_count_;
      stats_.inflight.store(inflight_count_);
      int seen = stats_.max_inflight_seen.load();
      while (inflight_count_ > seen &&
             !stats_.max_inflight_seen.compare_exchange_weak(seen, inflight_count_)) {
      }
    }
    struct InflightGuard {
      Gateway* g;
      ~InflightGuard() {
        std::lock_guard<std::mutex> lock(g->inflight_mutex_);
        --g->inflight_count_;
        g->stats_.inflight.store(g->inflight_count_);
        g->inflight_cv_.notify_one();
      }
    } guard{this};

    try {
      stats_.backend_calls.fetch_add(1);
      ChatResponse resp = backend_.complete(req);
      if (cache_) cache_->put(key, req, resp);
      return resp;
    } catch (const Error& e) {
      if (e.code() != Errc::BackendUnavailable) throw;  // auth/context/fatal: no retry
      if (attempt == retry_.max_attempts)
        raise(Errc::BackendUnavailable,
              std::string(e.what()) + " (after " + std::to_string(attempt) + " attempts)");
      stats_.retries.fetch_add(1);
      double delay_ms = retry_.base_delay_ms * std::pow(retry_.backoff, attempt - 1);
      logging::warn("attempt " + std::to_string(attempt) + "/" +
                    std::to_string(retry_.max_attempts) + " failed (" + e.what() + "), retrying in " +
                    format_fixed(delay_ms, 0) + " ms");
      if (delay_ms > 0)
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
    }
  }
  raise(Errc::BackendUnavailable, "retry loop exhausted");  // unreachable
}

}  // namespace sponsorscan
