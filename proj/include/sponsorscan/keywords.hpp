#pragma once

#include <string>
#include <vector>

#include "sponsorscan/embed.hpp"
#include "sponsorscan/textprep.hpp"

namespace sponsorscan {

struct ScoredKeyword {
  std::string phrase;   // 1..n tokens, space-joined, stopword-free
  double score = 0.0;   // cosine to the document embedding
};

struct ExtractionConfig {
  int ngram_min = 1;
  int ngram_max = 2;
  int top_k = 10;
  double mmr_lambda = 0.0;  // 0 = plain top-k by cosine
  bool use_maxsum = false;
  int maxsum_pool = 20;
  long maxsum_subset_cap = 200000;

  void validate() const;
};

// All distinct n-grams with n in [ngram_min, ngram_max], in order of first
// occurrence over the token sequence.
std::vector<std::string> generate_candidates(const std::vector<std::string>& tokens,
                                             const ExtractionConfig& cfg);

// Greedy maximal-marginal-relevance pick: first the candidate closest to the
// document, then repeatedly argmax of (1-lambda)*sim(c,doc) -
// lambda*max_{s selected} sim(c,s). Ties go to the earlier candidate.
// Returns indexes in selection order.
std::vector<int> mmr_select(const Embedding& doc, const std::vector<Embedding>& candidates,
                            int k, double lambda);

// Exhaustive search over k-subsets of the first `pool` candidates minimizing
// summed pairwise cosine; ties broken by higher summed document similarity,
// then by candidate order. Candidates are expected ranked by document
// similarity. Throws CombinatorialLimit when C(pool,k) exceeds subset_cap.
std::vector<int> maxsum_select(const std::vector<double>& doc_sims,
                               const std::vector<Embedding>& candidates, int k, int pool,
                               long subset_cap = 200000);

// KeyBERT-style extraction: candidates scored by cosine to the document
// embedding; top_k by score (ties to earlier occurrence); MMR when
// mmr_lambda > 0, MaxSum when use_maxsum.
std::vector<ScoredKeyword> extract_keywords(const std::string& doc_text,
                                            const ExtractionConfig& cfg,
                                            EmbeddingProvider& provider, const PrepContext& prep);

// Per-video keyword CSV: video_id, section(ad|content), phrase, score.
struct KeywordRow {
  std::string video_id;
  std::string section;  // "ad" | "content"
  std::string phrase;
  double score = 0.0;
};

std::string keywords_to_csv(const std::vector<KeywordRow>& rows);
std::vector<KeywordRow> keywords_from_csv(const std::string& csv);

}  // namespace sponsorscan
