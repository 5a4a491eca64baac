#include "sponsorscan/keywords.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <unordered_set>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/util.hpp"

namespace sponsorscan {

void ExtractionConfig::validate() const {
  if (ngram_min < 1 || ngram_min > ngram_max)
    raise(Errc::InvalidConfig, "need 1 <= ngram_min <= ngram_max");
  if (top_k < 1) raise(Errc::InvalidConfig, "top_k must be >= 1");
  if (mmr_lambda < 0.0 || mmr_lambda > 1.0)
    raise(Errc::InvalidConfig, "mmr_lambda must be in [0,1]");
  if (maxsum_pool < top_k) raise(Errc::InvalidConfig, "maxsum_pool must be >= top_k");
  if (use_maxsum && mmr_lambda > 0.0)
    raise(Errc::InvalidConfig, "use_maxsum and mmr_lambda > 0 are exclusive");
}

std::vector<std::string> generate_candidates(const std::vector<std::string>& tokens,
                                             const ExtractionConfig& cfg) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::string phrase;
    for (int n = 1; n <= cfg.ngram_max && i + static_cast<size_t>(n) <= tokens.size(); ++n) {
      if (n > 1) phrase += ' ';
      phrase += tokens[i + static_cast<size_t>(n) - 1];
      if (n < cfg.ngram_min) continue;
      if (seen.insert(phrase).second) out.push_back(phrase);
    }
  }
  return out;
}

std::vector<int> mmr_select(const Embedding& doc, const std::vector<Embedding>& candidates,
                            int k, double lambda) {
  const int n = static_cast<int>(candidates.size());
  if (k <= 0 || n == 0) return {};
  std::vector<double> doc_sim(n);
  for (int i = 0; i < n; ++i) doc_sim[i] = cosine(candidates[i], doc);

  std::vector<int> selected;
  std::vector<bool> used(n, false);
  std::vector<double> max_sel_sim(n, 0.0);  // max similarity to the selected set

  while (static_cast<int>(selected.size()) < std::min(k, n)) {
    int best = -1;
    double best_score = 0.0;
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      double score = selected.empty()
                         ? doc_sim[i]
                         : (1.0 - lambda) * doc_sim[i] - lambda * max_sel_sim[i];
      if (best < 0 || score > best_score) {  // exact tie keeps the earlier candidate
        best = i;
        best_score = score;
      }
    }
    used[best] = true;
    selected.push_back(best);
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      max_sel_sim[i] = std::max(max_sel_sim[i], cosine(candidates[i], candidates[best]));
    }
  }
  return selected;
}

namespace {

long binomial_capped(int n, int k, long cap) {
  if (k < 0 || k > n) return 0;
  long result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > cap) return cap + 1;
  }
  return result;
}

}  // namespace

std::vector<int> maxsum_select(const std::vector<double>& doc_sims,
                               const std::vector<Embedding>& candidates, int k, int pool,
                               long subset_cap) {
  const int n = std::min<int>(pool, static_cast<int>(candidates.size()));
  if (k <= 0) return {};
  if (k >= n) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  if (binomial_capped(n, k, subset_cap) > subset_cap)
    raise(Errc::CombinatorialLimit, "C(" + std::to_string(n) + "," + std::to_string(k) +
                                        ") exceeds cap " + std::to_string(subset_cap));

  Eigen::MatrixXd pair_sim(n, n);
  for (int i = 0; i < n; ++i) {
    pair_sim(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j)
      pair_sim(i, j) = pair_sim(j, i) = cosine(candidates[i], candidates[j]);
  }

  std::vector<int> combo(k);
  std::iota(combo.begin(), combo.end(), 0);
  std::vector<int> best;
  double best_pair_sum = 0.0;
  double best_doc_sum = 0.0;

  while (true) {
    double pair_sum = 0.0;
    double doc_sum = 0.0;
    for (int a = 0; a < k; ++a) {
      doc_sum += doc_sims[static_cast<size_t>(combo[a])];
      for (int b = a + 1; b < k; ++b) pair_sum += pair_sim(combo[a], combo[b]);
    }
    bool take = best.empty() || pair_sum < best_pair_sum ||
                (pair_sum == best_pair_sum && doc_sum > best_doc_sum);
    if (take) {
      best = combo;
      best_pair_sum = pair_sum;
      best_doc_sum = doc_sum;
    }
    // next combination in lexicographic order
    int i = k - 1;
    while (i >= 0 && combo[i] == n - k + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
  return best;
}

std::vector<ScoredKeyword> extract_keywords(const std::string& doc_text,
                                            const ExtractionConfig& cfg,
                                            EmbeddingProvider& provider, const PrepContext& prep) {
  cfg.validate();
  if (trim(doc_text).empty()) raise(Errc::Precondition, "document text is empty");

  CleanDoc doc = preprocess(doc_text, PrepProfile::FullPipeline, prep);
  if (doc.tokens.empty()) raise(Errc::EmptyAfterPreprocess, "no tokens survive preprocessing");

  std::vector<std::string> candidates = generate_candidates(doc.tokens, cfg);
  if (candidates.empty()) raise(Errc::EmptyAfterPreprocess, "no candidate phrases");

  Embedding doc_vec = embed_document(join(doc.tokens, " "), provider);
  std::vector<Embedding> cand_vecs = provider.embed_batch(candidates);

  std::vector<double> scores(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) scores[i] = cosine(cand_vecs[i], doc_vec);

  // rank by score descending, ties to earlier first occurrence
  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  std::vector<ScoredKeyword> out;
  if (cfg.mmr_lambda > 0.0) {
    auto picks = mmr_select(doc_vec, cand_vecs, cfg.top_k, cfg.mmr_lambda);
    for (int idx : picks) out.push_back({candidates[static_cast<size_t>(idx)],
                                         scores[static_cast<size_t>(idx)]});
  } else if (cfg.use_maxsum) {
    std::vector<Embedding> ranked_vecs;
    std::vector<double> ranked_scores;
    std::vector<size_t> ranked_src;
    int pool = std::min<int>(cfg.maxsum_pool, static_cast<int>(order.size()));
    for (int i = 0; i < pool; ++i) {
      ranked_vecs.push_back(cand_vecs[order[static_cast<size_t>(i)]]);
      ranked_scores.push_back(scores[order[static_cast<size_t>(i)]]);
      ranked_src.push_back(order[static_cast<size_t>(i)]);
    }
    auto picks = maxsum_select(ranked_scores, ranked_vecs, cfg.top_k, pool,
                               cfg.maxsum_subset_cap);
    for (int idx : picks) {
      size_t src = ranked_src[static_cast<size_t>(idx)];
      out.push_back({candidates[src], scores[src]});
    }
  } else {
    for (size_t i = 0; i < order.size() && i < static_cast<size_t>(cfg.top_k); ++i)
      out.push_back({candidates[order[i]], scores[order[i]]});
  }
  return out;
}

std::string keywords_to_csv(const std::vector<KeywordRow>& rows) {
  std::string out = "video_id,section,phrase,score\n";
  for (const auto& row : rows) {
    out += csv_escape(row.video_id) + "," + row.section + "," + csv_escape(row.phrase) + "," +
           format_fixed(row.score, 6) + "\n";
  }
  return out;
}

std::vector<KeywordRow> keywords_from_csv(const std::string& csv) {
  std::vector<KeywordRow> rows;
  auto lines = split_lines(csv);
  for (size_t i = 1; i < lines.size(); ++i) {  // skip header
    if (trim(lines[i]).empty()) continue;
    auto fields = csv_split(lines[i]);
    if (fields.size() != 4)
      raise(Errc::MalformedInput, "keyword CSV line " + std::to_string(i + 1));
    rows.push_back({fields[0], fields[1], fields[2], std::strtod(fields[3].c_str(), nullptr)});
  }
  return rows;
}

}  // namespace sponsorscan
