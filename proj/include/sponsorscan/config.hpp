#pragma once

#include <string>
#include <vector>

#include "sponsorscan/detect.hpp"
#include "sponsorscan/grouping.hpp"
#include "sponsorscan/keywords.hpp"
#include "sponsorscan/llm.hpp"

namespace sponsorscan {

#ifndef SPONSORSCAN_DATA_DIR
#define SPONSORSCAN_DATA_DIR "data"
#endif

/// Effective run configuration. Loadable from a TOML-style key=value config
/// file with every value overridable by a command-line flag; API keys come
/// only from the environment.
struct RunConfig {
  // backend selection
  std::string backend = "mock";  // mock | remote
  std::string model_id = "gpt-4o-2024-08-06";
  std::string api_base = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string embed_model_id = "text-embedding-3-small";
  double temperature = 0.0;

  // directories and data files
  std::string work_dir = "work";
  std::string cache_dir;  // default: <work_dir>/cache
  std::string data_dir = SPONSORSCAN_DATA_DIR;
  std::string stopword_path;  // default: <data_dir>/stopwords.txt
  std::string lemma_path;     // default: <data_dir>/lemmas.tsv
  std::string prompts_dir;    // default: <data_dir>/prompts

  // preprocessing profile per stage
  std::string detect_profile = "light";
  std::string keywords_profile = "full";

  // stage parameters
  DetectionConfig detection;
  ExtractionConfig extraction{1, 2, 10, 0.5, false, 20, 200000};
  int grouping_batch_size = 300;
  int grouping_max_rounds = 5;
  int content_target = 9;
  int ad_target = 4;

  // gateway discipline
  int max_attempts = 4;
  int retry_base_ms = 500;
  int requests_per_minute = 0;  // 0 = unlimited
  int max_inflight = 4;
  int parallelism = 4;
  int request_timeout_s = 120;

  // mock backend / embedder
  std::vector<std::string> mock_markers = MockBackend::default_markers();
  int hash_dim = 256;
  unsigned long hash_seed = 42;
  int mock_fail_after = 0;  // testing hook: mock backend fails after N calls

  // evaluation
  std::string gold_path;
  double iou_threshold = 0.5;

  std::string resolved_cache_dir() const;
  std::string resolved_stopword_path() const;
  std::string resolved_lemma_path() const;
  std::string resolved_prompts_dir() const;

  RetryPolicy retry_policy() const { return {max_attempts, retry_base_ms, 2.0}; }
  RateLimit rate_limit() const { return {requests_per_minute, max_inflight}; }
  RemoteConfig remote_config() const { return {api_base, api_key_env, request_timeout_s}; }

  void validate() const;        // throws Error(InvalidConfig)
  std::string to_toml() const;  // effective values, canonical order
  std::string digest() const;   // sha256 of to_toml()
};

}  // namespace sponsorscan
