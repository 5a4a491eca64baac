#include "sponsorscan/embed.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/util.hpp"

using nlohmann::json;

namespace sponsorscan {

double cosine(const Embedding& u, const Embedding& v) {
  if (u.size() != v.size())
    raise(Errc::DimensionMismatch,
          std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  Eigen::VectorXd ud = u.cast<double>();
  Eigen::VectorXd vd = v.cast<double>();
  double nu = ud.norm();
  double nv = vd.norm();
  if (nu == 0.0 || nv == 0.0) raise(Errc::ZeroVector, "cosine of all-zero vector");
  double c = ud.dot(vd) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

Embedding EmbeddingProvider::embed(const std::string& text) {
  return embed_batch({text}).front();
}

// ---- HashEmbedder ----

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct SplitMix64 {
  uint64_t state;
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() {  // (0, 1]
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }
};

}  // namespace

HashEmbedder::HashEmbedder(int dim, uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 2) raise(Errc::InvalidConfig, "embedding dimension must be >= 2");
}

Embedding HashEmbedder::compute_token_vector(const std::string& token) const {
  SplitMix64 rng{fnv1a64(token) ^ seed_};
  Embedding v(dim_);
  // Box-Muller over the hand-rolled generator keeps output identical across
  // standard library implementations
  for (int i = 0; i < dim_; i += 2) {
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = static_cast<float>(r * std::cos(2.0 * M_PI * u2));
    if (i + 1 < dim_) v[i + 1] = static_cast<float>(r * std::sin(2.0 * M_PI * u2));
  }
  float norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

Embedding HashEmbedder::token_vector(const std::string& token) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(token);
    if (it != memo_.end()) return it->second;
  }
  Embedding v = compute_token_vector(token);
  std::lock_guard<std::mutex> lock(mutex_);
  memo_.emplace(token, v);
  return v;
}

std::vector<Embedding> HashEmbedder::embed_batch(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Embedding sum = Embedding::Zero(dim_);
    auto tokens = split_ws(text);
    for (const auto& token : tokens) sum += token_vector(token);
    if (!tokens.empty()) {
      sum /= static_cast<float>(tokens.size());
      float norm = sum.norm();
      if (norm > 0) sum /= norm;
    }
    out.push_back(std::move(sum));
  }
  return out;
}

// ---- RemoteEmbedder ----

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig cfg, std::string cache_dir)
    : cfg_(std::move(cfg)), cache_dir_(std::move(cache_dir)) {
  if (!cache_dir_.empty()) ensure_dir(cache_dir_);
}

namespace {

std::string embed_cache_key(const std::string& model, const std::string& text) {
  return sha256_hex("embed\n" + std::to_string(model.size()) + ":" + model +
                    std::to_string(text.size()) + ":" + text);
}

}  // namespace

std::vector<Embedding> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
  std::vector<Embedding> out(texts.size());
  std::vector<size_t> missing;
  for (size_t i = 0; i < texts.size(); ++i) {
    bool cached = false;
    if (!cache_dir_.empty()) {
      std::string path =
          (std::filesystem::path(cache_dir_) / (embed_cache_key(cfg_.model_id, texts[i]) + ".json"))
              .string();
      if (file_exists(path)) {
        json doc = json::parse(read_file(path), nullptr, false);
        if (!doc.is_discarded() && doc.contains("embedding")) {
          const auto& arr = doc["embedding"];
          Embedding v(arr.size());
          for (size_t k = 0; k < arr.size(); ++k) v[static_cast<long>(k)] = arr[k].get<float>();
          out[i] = std::move(v);
          cached = true;
        }
      }
    }
    if (!cached) missing.push_back(i);
  }

  for (size_t begin = 0; begin < missing.size();
       begin += static_cast<size_t>(cfg_.batch_size)) {
    size_t end = std::min(missing.size(), begin + static_cast<size_t>(cfg_.batch_size));
    std::vector<std::string> batch;
    for (size_t k = begin; k < end; ++k) batch.push_back(texts[missing[k]]);
    auto vecs = fetch(batch);
    for (size_t k = begin; k < end; ++k) {
      out[missing[k]] = vecs[k - begin];
      if (!cache_dir_.empty()) {
        nlohmann::ordered_json doc;
        doc["model"] = cfg_.model_id;
        doc["input"] = texts[missing[k]];
        doc["embedding"] = std::vector<float>(vecs[k - begin].data(),
                                              vecs[k - begin].data() + vecs[k - begin].size());
        atomic_write_file(
            (std::filesystem::path(cache_dir_) /
             (embed_cache_key(cfg_.model_id, texts[missing[k]]) + ".json"))
                .string(),
            doc.dump() + "\n");
      }
    }
  }

  for (auto& v : out) {
    if (v.size() == 0) continue;
    int expected = 0;
    if (dim_.compare_exchange_strong(expected, static_cast<int>(v.size()))) continue;
    if (static_cast<int>(v.size()) != expected)
      raise(Errc::DimensionMismatch, "provider returned mixed dimensions");
  }
  return out;
}

Embedding embed_document(const std::string& text, EmbeddingProvider& provider,
                         size_t chunk_tokens) {
  auto tokens = split_ws(text);
  if (tokens.size() <= chunk_tokens || chunk_tokens == 0) return provider.embed(text);
  std::vector<std::string> chunks;
  for (size_t begin = 0; begin < tokens.size(); begin += chunk_tokens) {
    size_t end = std::min(tokens.size(), begin + chunk_tokens);
    chunks.push_back(join({tokens.begin() + static_cast<long>(begin),
                           tokens.begin() + static_cast<long>(end)},
                          " "));
  }
  auto vecs = provider.embed_batch(chunks);
  Embedding mean = Embedding::Zero(vecs.front().size());
  for (const auto& v : vecs) mean += v;
  mean /= static_cast<float>(vecs.size());
  float norm = mean.norm();
  if (norm > 0) mean /= norm;
  return mean;
}

}  // namespace sponsorscan
