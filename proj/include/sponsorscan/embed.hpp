#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "sponsorscan/llm.hpp"

namespace sponsorscan {

using Embedding = Eigen::VectorXf;

// dot(u,v)/(|u||v|) in [-1,1], accumulated in double.
// Throws DimensionMismatch / ZeroVector.
double cosine(const Embedding& u, const Embedding& v);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) = 0;
  virtual int dimension() const = 0;
  virtual std::string name() const = 0;

  Embedding embed(const std::string& text);
};

// Deterministic mock: every token hashes to a pseudo-random unit vector
// (fixed seed), a text embeds to the normalized mean of its token vectors.
// Identical texts always give identical vectors; shared tokens raise cosine.
class HashEmbedder : public EmbeddingProvider {
 public:
  explicit HashEmbedder(int dim = 256, uint64_t seed = 42);

  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;
  int dimension() const override { return dim_; }
  std::string name() const override { return "hash"; }

  Embedding token_vector(const std::string& token);

 private:
  Embedding compute_token_vector(const std::string& token) const;
  int dim_;
  uint64_t seed_;
  std::mutex mutex_;
  std::unordered_map<std::string, Embedding> memo_;
};

// OpenAI-compatible embeddings endpoint, disk-cached per input text like the
// chat gateway.
struct RemoteEmbedderConfig {
  RemoteConfig remote;
  std::string model_id = "text-embedding-3-small";
  int batch_size = 64;
};

class RemoteEmbedder : public EmbeddingProvider {
 public:
  RemoteEmbedder(RemoteEmbedderConfig cfg, std::string cache_dir);

  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;
  int dimension() const override { return dim_.load(); }
  std::string name() const override { return "remote"; }

 private:
  std::vector<Embedding> fetch(const std::vector<std::string>& texts);
  RemoteEmbedderConfig cfg_;
  std::string cache_dir_;
  std::atomic<int> dim_{0};
};

// Embeds long text in provider-sized chunks and takes the normalized mean
// (embedding endpoints cap input size).
Embedding embed_document(const std::string& text, EmbeddingProvider& provider,
                         size_t chunk_tokens = 256);

}  // namespace sponsorscan
