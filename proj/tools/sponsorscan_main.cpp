#include <CLI11.hpp>
#include <iostream>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/log.hpp"
#include "sponsorscan/pipeline.hpp"

using namespace sponsorscan;

namespace {

int usage_error_code(const Error& e) {
  switch (e.code()) {
    case Errc::InvalidConfig:
    case Errc::Precondition:
    case Errc::MissingFile:
    case Errc::DuplicateVideoId:
    case Errc::UnknownFormatTag:
      return kExitUsageError;
    default:
      return kExitPartialFailure;
  }
}

void attach_config_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--backend", cfg.backend, "LLM backend: remote or mock")
      ->check(CLI::IsMember({"remote", "mock"}));
  app.add_option("--model-id", cfg.model_id, "chat model id");
  app.add_option("--api-base", cfg.api_base, "OpenAI-compatible API base URL");
  app.add_option("--api-key-env", cfg.api_key_env, "environment variable holding the API key");
  app.add_option("--embed-model-id", cfg.embed_model_id, "embeddings model id");
  app.add_option("--temperature", cfg.temperature, "sampling temperature");
  app.add_option("--work-dir", cfg.work_dir, "pipeline work directory");
  app.add_option("--cache-dir", cfg.cache_dir, "response cache directory");
  app.add_option("--data-dir", cfg.data_dir, "bundled data directory (stopwords, prompts)");
  app.add_option("--stopword-path", cfg.stopword_path, "stopword list override");
  app.add_option("--lemma-path", cfg.lemma_path, "lemma table override");
  app.add_option("--prompts-dir", cfg.prompts_dir, "prompt templates directory override");
  app.add_option("--detect-profile", cfg.detect_profile, "preprocessing before detection")
      ->check(CLI::IsMember({"light", "full"}));
  app.add_option("--keywords-profile", cfg.keywords_profile,
                 "preprocessing before keyword extraction");
  app.add_option("--time-tol", cfg.detection.time_tol, "span alignment time tolerance (s)");
  app.add_option("--sim-tol", cfg.detection.sim_tol, "span validation similarity threshold");
  app.add_option("--sim-floor", cfg.detection.sim_floor, "span rejection similarity floor");
  app.add_option("--merge-gap", cfg.detection.merge_gap, "max gap between merged spans (s)");
  app.add_option("--prompt-budget-chars", cfg.detection.prompt_budget_chars,
                 "request size ceiling in characters");
  app.add_option("--window-overlap-s", cfg.detection.window_overlap_s,
                 "transcript window overlap (s)");
  app.add_option("--ngram-min", cfg.extraction.ngram_min, "candidate n-gram minimum length");
  app.add_option("--ngram-max", cfg.extraction.ngram_max, "candidate n-gram maximum length");
  app.add_option("--top-k", cfg.extraction.top_k, "keywords per document side");
  app.add_option("--mmr-lambda", cfg.extraction.mmr_lambda, "MMR diversity weight (0 = off)");
  app.add_flag("--use-maxsum", cfg.extraction.use_maxsum, "use MaxSum diversification");
  app.add_option("--maxsum-pool", cfg.extraction.maxsum_pool, "MaxSum candidate pool size");
  app.add_option("--grouping-batch-size", cfg.grouping_batch_size, "keywords per grouping call");
  app.add_option("--grouping-max-rounds", cfg.grouping_max_rounds, "grouping cascade cap");
  app.add_option("--content-target", cfg.content_target, "target content category count");
  app.add_option("--ad-target", cfg.ad_target, "target ad category count");
  app.add_option("--max-attempts", cfg.max_attempts, "request attempts before giving up");
  app.add_option("--retry-base-ms", cfg.retry_base_ms, "base backoff delay (ms)");
  app.add_option("--requests-per-minute", cfg.requests_per_minute, "rate limit (0 = off)");
  app.add_option("--max-inflight", cfg.max_inflight, "max concurrent backend requests");
  app.add_option("--parallelism", cfg.parallelism, "worker pool size");
  app.add_option("--request-timeout-s", cfg.request_timeout_s, "HTTP timeout (s)");
  app.add_option("--mock-markers", cfg.mock_markers, "mock backend ad marker phrases");
  app.add_option("--hash-dim", cfg.hash_dim, "mock embedder dimension");
  app.add_option("--hash-seed", cfg.hash_seed, "mock embedder seed");
  app.add_option("--mock-fail-after", cfg.mock_fail_after,
                 "testing: mock backend fails after N calls")
      ->group("");  // hidden
  app.add_option("--gold", cfg.gold_path, "gold span JSONL for evaluation");
  app.add_option("--iou-threshold", cfg.iou_threshold, "segment matching IoU threshold");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sponsorscan — sponsored-segment detection and keyword analytics over video "
               "transcripts"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style key=value config file");

  RunConfig cfg;
  StageOptions opts;
  bool verbose = false;
  attach_config_options(app, cfg);
  app.add_flag("--resume", opts.resume, "skip videos already done for the stage");
  app.add_option("--video-id", opts.video_id, "restrict the stage to one video");
  app.add_flag("-v,--verbose", verbose, "debug logging");

  std::string manifest_path;
  auto* cmd_ingest = app.add_subcommand("ingest", "parse transcripts listed in a manifest");
  cmd_ingest->add_option("manifest", manifest_path, "manifest file")->required();
  auto* cmd_detect = app.add_subcommand("detect", "detect sponsored segments per transcript");
  auto* cmd_keywords =
      app.add_subcommand("keywords", "extract ad/content keywords per detected video");
  auto* cmd_group = app.add_subcommand("group", "reduce keywords to categories via the LLM");
  auto* cmd_analyze =
      app.add_subcommand("analyze", "prevalence, cross-tab and alignment reports");
  auto* cmd_eval = app.add_subcommand("eval", "precision/recall/F1 against gold spans");
  auto* cmd_run = app.add_subcommand("run", "all stages in order");
  cmd_run->add_option("manifest", manifest_path, "manifest file")->required();
  auto* cmd_report = app.add_subcommand("report", "re-emit reports from persisted artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsageError;
  }
  if (verbose) logging::set_level(logging::Level::Debug);

  try {
    Pipeline pipeline(cfg);
    if (cmd_ingest->parsed()) return pipeline.ingest(manifest_path, opts);
    if (cmd_detect->parsed()) return pipeline.detect(opts);
    if (cmd_keywords->parsed()) return pipeline.keywords(opts);
    if (cmd_group->parsed()) return pipeline.group(opts);
    if (cmd_analyze->parsed()) return pipeline.analyze(opts);
    if (cmd_eval->parsed()) return pipeline.eval(opts);
    if (cmd_run->parsed()) return pipeline.run(manifest_path, opts);
    if (cmd_report->parsed()) return pipeline.report(opts);
    std::cerr << "no command given\n";
    return kExitUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage_error_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartialFailure;
  }
}
