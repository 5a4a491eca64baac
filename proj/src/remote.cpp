#include "sponsorscan/embed.hpp"  // pulls Eigen; must precede OpenSSL headers
#include "sponsorscan/errors.hpp"
#include "sponsorscan/llm.hpp"
#include "sponsorscan/util.hpp"

#include <cstdlib>
#include <httplib.h>
#include <nlohmann/json.hpp>

using nlohmann::json;

namespace sponsorscan {

namespace {

struct SplitUrl {
  std::string host;  // scheme://host[:port]
  std::string base_path;
};

SplitUrl split_api_base(const std::string& api_base) {
  size_t scheme = api_base.find("://");
  if (scheme == std::string::npos)
    raise(Errc::InvalidConfig, "api_base must include a scheme: " + api_base);
  size_t path = api_base.find('/', scheme + 3);
  SplitUrl out;
  if (path == std::string::npos) {
    out.host = api_base;
  } else {
    out.host = api_base.substr(0, path);
    out.base_path = api_base.substr(path);
    while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
  }
  return out;
}

std::string require_api_key(const std::string& env_name) {
  const char* key = std::getenv(env_name.c_str());
  if (!key || !*key)
    raise(Errc::AuthError, "environment variable " + env_name + " is not set");
  return key;
}

[[noreturn]] void raise_for_status(int status, const std::string& body) {
  std::string detail = "HTTP " + std::to_string(status) + ": " + body.substr(0, 300);
  if (status == 401 || status == 403) raise(Errc::AuthError, detail);
  if (status == 408 || status == 429 || status >= 500) raise(Errc::BackendUnavailable, detail);
  std::string lower = to_lower(body);
  if (lower.find("context_length") != std::string::npos ||
      lower.find("maximum context") != std::string::npos ||
      lower.find("too many tokens") != std::string::npos)
    raise(Errc::ContextTooLong, detail);
  raise(Errc::BackendRejected, detail);
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {}

ChatResponse RemoteBackend::complete(const ChatRequest& req) {
  std::string key = require_api_key(cfg_.api_key_env);
  SplitUrl url = split_api_base(cfg_.api_base);

  json messages = json::array();
  if (!req.system.empty()) messages.push_back({{"role", "system"}, {"content", req.system}});
  messages.push_back({{"role", "user"}, {"content", req.user}});
  json body = {{"model", req.model_id}, {"messages", messages}, {"temperature", req.temperature}};

  httplib::Client client(url.host);
  client.set_connection_timeout(cfg_.timeout_s, 0);
  client.set_read_timeout(cfg_.timeout_s, 0);
  client.set_write_timeout(cfg_.timeout_s, 0);
  httplib::Headers headers = {{"Authorization", "Bearer " + key}};

  auto res = client.Post(url.base_path + "/chat/completions", headers, body.dump(),
                         "application/json");
  if (!res) raise(Errc::BackendUnavailable, "transport error: " + httplib::to_string(res.error()));
  if (res->status != 200) raise_for_status(res->status, res->body);

  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty())
    raise(Errc::BackendRejected, "malformed completion response");

  const json& choice = doc["choices"][0];
  ChatResponse resp;
  if (choice.contains("message") && choice["message"].contains("content") &&
      choice["message"]["content"].is_string())
    resp.content = choice["message"]["content"].get<std::string>();
  resp.finish_reason = finish_reason_from_name(choice.value("finish_reason", "stop"));
  if (doc.contains("usage")) {
    resp.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
    resp.completion_tokens = doc["usage"].value("completion_tokens", 0L);
  }
  if (resp.content.empty() && resp.finish_reason == FinishReason::Stop)
    raise(Errc::BackendRejected, "empty content with finish_reason=stop");
  return resp;
}

std::vector<Embedding> RemoteEmbedder::fetch(const std::vector<std::string>& texts) {
  std::string key = require_api_key(cfg_.remote.api_key_env);
  SplitUrl url = split_api_base(cfg_.remote.api_base);

  json body = {{"model", cfg_.model_id}, {"input", texts}};
  httplib::Client client(url.host);
  client.set_connection_timeout(cfg_.remote.timeout_s, 0);
  client.set_read_timeout(cfg_.remote.timeout_s, 0);
  client.set_write_timeout(cfg_.remote.timeout_s, 0);
  httplib::Headers headers = {{"Authorization", "Bearer " + key}};

  auto res = client.Post(url.base_path + "/embeddings", headers, body.dump(), "application/json");
  if (!res) raise(Errc::BackendUnavailable, "transport error: " + httplib::to_string(res.error()));
  if (res->status != 200) raise_for_status(res->status, res->body);

  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("data") || doc["data"].size() != texts.size())
    raise(Errc::BackendRejected, "malformed embeddings response");

  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& item : doc["data"]) {
    const auto& arr = item.at("embedding");
    Embedding v(arr.size());
    for (size_t k = 0; k < arr.size(); ++k) v[static_cast<long>(k)] = arr[k].get<float>();
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace sponsorscan
