#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sponsorscan/analytics.hpp"
#include "sponsorscan/config.hpp"

namespace sponsorscan {

enum class StageStatus { Pending, Done, Failed };

struct StageOptions {
  bool resume = false;      // skip videos already Done for the stage
  std::string video_id;     // restrict to one video when non-empty
};

// exit codes per the CLI contract
constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 1;
constexpr int kExitUsageError = 2;

/// Orchestrates the staged batch pipeline over a work directory:
///   transcripts/  detections/  keywords/  groups/  reports/  state/  cache/
/// Stage progress is tracked per video through atomic per-video state files;
/// stages run only when their predecessors are Done.
class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg);

  int ingest(const std::string& manifest_path, const StageOptions& opts = {});
  int detect(const StageOptions& opts = {});
  int keywords(const StageOptions& opts = {});
  int group(const StageOptions& opts = {});
  int analyze(const StageOptions& opts = {});
  int eval(const StageOptions& opts = {});
  int run(const std::string& manifest_path, const StageOptions& opts = {});
  int report(const StageOptions& opts = {});

  // state inspection (used by tests and `--resume`)
  StageStatus stage_status(const std::string& stage, const std::string& video_id) const;
  std::vector<std::string> videos_done(const std::string& stage) const;

  const RunConfig& config() const { return cfg_; }
  const GatewayStats* gateway_stats() const;

  // testing hook: wraps the constructed backend (fault injection, counting)
  using BackendDecorator = std::function<std::unique_ptr<LlmBackend>(std::unique_ptr<LlmBackend>)>;
  void set_backend_decorator(BackendDecorator decorator) { decorator_ = std::move(decorator); }

 private:
  struct Runtime;  // lazily built gateway + provider + templates + prep

  std::string dir(const std::string& name) const;
  std::string state_path(const std::string& stage, const std::string& video_id) const;
  void mark(const std::string& stage, const std::string& video_id, StageStatus status,
            const std::string& reason = "");
  CorpusManifest work_manifest() const;
  Runtime& runtime();
  std::vector<std::string> stage_inputs(const std::string& prior_stage,
                                        const std::string& this_stage,
                                        const StageOptions& opts) const;
  void rebuild_detections_jsonl();
  std::string build_run_summary(const ReportBundle& bundle,
                                const std::vector<std::string>& files) const;
  int analyze_impl(const StageOptions& opts, bool mark_state);
  int eval_impl(const StageOptions& opts, bool mark_state);

  RunConfig cfg_;
  BackendDecorator decorator_;
  std::shared_ptr<Runtime> runtime_;
};

}  // namespace sponsorscan
