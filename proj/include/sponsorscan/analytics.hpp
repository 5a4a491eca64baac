#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sponsorscan/detect.hpp"
#include "sponsorscan/embed.hpp"
#include "sponsorscan/grouping.hpp"
#include "sponsorscan/manifest.hpp"

namespace sponsorscan {

struct PrevalenceRow {
  std::string channel;  // "Total" for the per-kind totals
  TranscriptKind kind = TranscriptKind::Generated;
  int detected = 0;
  int collected = 0;
  std::optional<int> prevalence_pct;  // round-half-up(100*detected/collected); empty when collected=0
};

// One row per (channel, kind) with any collected transcripts, channels in
// sorted order, plus Total rows per kind. Detections must reference manifest
// video ids (UnknownVideoId otherwise).
std::vector<PrevalenceRow> prevalence_table(const std::vector<DetectionResult>& detections,
                                            const CorpusManifest& manifest);

struct CrossTab {
  std::vector<std::string> content_categories;  // sorted render order
  std::vector<std::string> ad_categories;
  std::map<std::pair<std::string, std::string>, int> cells;
  std::map<std::string, int> content_marginals;
  std::map<std::string, int> ad_marginals;
  int total = 0;          // categorized has_ad videos
  int uncategorized = 0;  // has_ad videos lacking either category
};

CrossTab cross_tab(const CategoryAssignment& assignment,
                   const std::vector<DetectionResult>& detections);

struct AlignmentScore {
  double jaccard = 0.0;
  double centroid_cosine = 0.0;
};

// Phrase-set Jaccard plus cosine of the normalized mean embeddings of the
// two keyword sets. Throws EmptyKeywordSet.
AlignmentScore alignment_score(const std::vector<std::string>& ad_phrases,
                               const std::vector<Embedding>& ad_vectors,
                               const std::vector<std::string>& content_phrases,
                               const std::vector<Embedding>& content_vectors);

struct Interval {
  double start = 0.0;
  double end = 0.0;
};

struct GoldSpans {
  std::string video_id;
  std::vector<Interval> spans;  // non-overlapping, end > start
};

// JSONL, one object per video: {"video_id": str, "spans": [{"start","end"}]}
std::vector<GoldSpans> parse_gold_spans(const std::string& jsonl);
std::vector<GoldSpans> load_gold_spans(const std::string& path);

enum class MetricLevel { TimeLevel, SegmentLevel };

struct EvalMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  MetricLevel level = MetricLevel::TimeLevel;
  double iou_threshold = 0.0;  // segment level only
};

double interval_iou(const Interval& a, const Interval& b);

// Overlap-seconds precision/recall over span unions. Conventions: both empty
// -> all 1; empty prediction -> precision 1; empty gold -> recall 1.
EvalMetrics time_level_metrics(const std::vector<Interval>& predicted,
                               const std::vector<Interval>& gold, double video_duration);

// Greedy one-to-one matching in descending IoU order; a pair matches when
// IoU >= threshold. Same empty-set conventions as the time level.
EvalMetrics segment_level_metrics(const std::vector<Interval>& predicted,
                                  const std::vector<Interval>& gold, double iou_threshold);

// ---- report rendering (pure string producers; emit_reports writes files) ----

struct AlignmentRow {
  std::string video_id;
  std::string content_category;
  std::string ad_category;
  AlignmentScore score;
};

struct EvalRow {
  std::string video_id;  // "(micro)" for the corpus-level rows
  EvalMetrics time_level;
  EvalMetrics segment_level;
};

std::string render_prevalence_csv(const std::vector<PrevalenceRow>& rows);
std::string render_prevalence_markdown(const std::vector<PrevalenceRow>& rows);
std::string render_crosstab_csv(const CrossTab& tab);
std::string render_crosstab_markdown(const CrossTab& tab);
std::string render_alignment_csv(const std::vector<AlignmentRow>& rows);
std::string render_alignment_markdown(const std::vector<AlignmentRow>& rows);
std::string render_eval_csv(const std::vector<EvalRow>& rows);
std::string render_eval_markdown(const std::vector<EvalRow>& rows);

struct ReportBundle {
  std::vector<PrevalenceRow> prevalence;
  CrossTab crosstab;
  std::vector<AlignmentRow> alignment;
  std::vector<EvalRow> eval;
  bool has_eval = false;
  std::string run_summary_json;  // written verbatim as run_summary.json
};

// Writes CSV + Markdown per table (eval only when has_eval) plus the run
// summary; all writes are atomic. Returns the file names written.
std::vector<std::string> emit_reports(const ReportBundle& bundle, const std::string& out_dir);

}  // namespace sponsorscan
