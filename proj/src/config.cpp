#include "sponsorscan/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/textprep.hpp"
#include "sponsorscan/util.hpp"

namespace fs = std::filesystem;

namespace sponsorscan {

std::string RunConfig::resolved_cache_dir() const {
  return cache_dir.empty() ? (fs::path(work_dir) / "cache").string() : cache_dir;
}

std::string RunConfig::resolved_stopword_path() const {
  return stopword_path.empty() ? (fs::path(data_dir) / "stopwords.txt").string() : stopword_path;
}

std::string RunConfig::resolved_lemma_path() const {
  return lemma_path.empty() ? (fs::path(data_dir) / "lemmas.tsv").string() : lemma_path;
}

std::string RunConfig::resolved_prompts_dir() const {
  return prompts_dir.empty() ? (fs::path(data_dir) / "prompts").string() : prompts_dir;
}

void RunConfig::validate() const {
  if (backend != "mock" && backend != "remote")
    raise(Errc::InvalidConfig, "backend must be mock or remote, got: " + backend);
  if (parallelism < 1) raise(Errc::InvalidConfig, "parallelism must be >= 1");
  if (max_inflight < 1) raise(Errc::InvalidConfig, "max_inflight must be >= 1");
  if (max_attempts < 1) raise(Errc::InvalidConfig, "max_attempts must be >= 1");
  if (temperature < 0.0 || temperature > 2.0)
    raise(Errc::InvalidConfig, "temperature must be in [0,2]");
  if (grouping_batch_size < 1) raise(Errc::InvalidConfig, "grouping_batch_size must be >= 1");
  if (content_target < 1 || ad_target < 1)
    raise(Errc::InvalidConfig, "grouping targets must be >= 1");
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0)
    raise(Errc::InvalidConfig, "iou_threshold must be in (0,1]");
  profile_from_name(detect_profile);
  profile_from_name(keywords_profile);
  extraction.validate();
  if (backend == "remote" && !std::getenv(api_key_env.c_str()))
    raise(Errc::InvalidConfig,
          "backend=remote requires the " + api_key_env + " environment variable");
}

std::string RunConfig::to_toml() const {
  std::ostringstream out;
  out << "backend = \"" << backend << "\"\n";
  out << "model_id = \"" << model_id << "\"\n";
  out << "api_base = \"" << api_base << "\"\n";
  out << "api_key_env = \"" << api_key_env << "\"\n";
  out << "embed_model_id = \"" << embed_model_id << "\"\n";
  out << "temperature = " << format_fixed(temperature, 3) << "\n";
  out << "work_dir = \"" << work_dir << "\"\n";
  out << "cache_dir = \"" << resolved_cache_dir() << "\"\n";
  out << "data_dir = \"" << data_dir << "\"\n";
  out << "stopword_path = \"" << resolved_stopword_path() << "\"\n";
  out << "lemma_path = \"" << resolved_lemma_path() << "\"\n";
  out << "prompts_dir = \"" << resolved_prompts_dir() << "\"\n";
  out << "detect_profile = \"" << detect_profile << "\"\n";
  out << "keywords_profile = \"" << keywords_profile << "\"\n";
  out << "time_tol = " << format_fixed(detection.time_tol, 3) << "\n";
  out << "sim_tol = " << format_fixed(detection.sim_tol, 3) << "\n";
  out << "sim_floor = " << format_fixed(detection.sim_floor, 3) << "\n";
  out << "merge_gap = " << format_fixed(detection.merge_gap, 3) << "\n";
  out << "prompt_budget_chars = " << detection.prompt_budget_chars << "\n";
  out << "window_overlap_s = " << format_fixed(detection.window_overlap_s, 3) << "\n";
  out << "ngram_min = " << extraction.ngram_min << "\n";
  out << "ngram_max = " << extraction.ngram_max << "\n";
  out << "top_k = " << extraction.top_k << "\n";
  out << "mmr_lambda = " << format_fixed(extraction.mmr_lambda, 3) << "\n";
  out << "use_maxsum = " << (extraction.use_maxsum ? "true" : "false") << "\n";
  out << "maxsum_pool = " << extraction.maxsum_pool << "\n";
  out << "grouping_batch_size = " << grouping_batch_size << "\n";
  out << "grouping_max_rounds = " << grouping_max_rounds << "\n";
  out << "content_target = " << content_target << "\n";
  out << "ad_target = " << ad_target << "\n";
  out << "max_attempts = " << max_attempts << "\n";
  out << "retry_base_ms = " << retry_base_ms << "\n";
  out << "requests_per_minute = " << requests_per_minute << "\n";
  out << "max_inflight = " << max_inflight << "\n";
  out << "parallelism = " << parallelism << "\n";
  out << "request_timeout_s = " << request_timeout_s << "\n";
  out << "mock_markers = \"" << join(mock_markers, ";") << "\"\n";
  out << "hash_dim = " << hash_dim << "\n";
  out << "hash_seed = " << hash_seed << "\n";
  out << "gold_path = \"" << gold_path << "\"\n";
  out << "iou_threshold = " << format_fixed(iou_threshold, 3) << "\n";
  return out.str();
}

std::string RunConfig::digest() const { return sha256_hex(to_toml()); }

}  // namespace sponsorscan
