#pragma once

#include <string>
#include <vector>

#include "sponsorscan/llm.hpp"
#include "sponsorscan/reply_parse.hpp"
#include "sponsorscan/transcript.hpp"

namespace sponsorscan {

enum class SpanValidation { Rejected = 0, Unvalidated = 1, Validated = 2 };

const char* validation_name(SpanValidation v);
SpanValidation validation_from_name(const std::string& name);

struct AdSpan {
  double start = 0.0;
  double end = 0.0;  // > start
  std::string text;
  std::vector<int> entry_indexes;  // contiguous and non-empty when Validated
  SpanValidation validation = SpanValidation::Rejected;
};

struct DetectionResult {
  std::string video_id;
  std::string model_id;
  bool has_ad = false;  // true iff at least one non-Rejected span
  std::vector<AdSpan> spans;  // sorted by start, non-overlapping after merge
  std::string raw_response;
};

struct DetectionConfig {
  double time_tol = 5.0;     // max |record.start - entry.start| to anchor a span
  double sim_tol = 0.8;      // token Jaccard at or above which a span validates
  double sim_floor = 0.5;    // [sim_floor, sim_tol) -> Unvalidated
  double merge_gap = 3.0;    // spans closer than this merge
  size_t prompt_budget_chars = 100000;
  double window_overlap_s = 60.0;
};

// Token-set Jaccard after LightClean on both sides.
double token_jaccard(const std::string& a, const std::string& b);

// Anchors a claimed record to the transcript: nearest entry by start, then
// walks forward while the accumulated text best matches the record text.
// The verdict encodes failure; Rejected spans keep the claimed times for audit.
AdSpan align_span(const LlmRecord& record, const Transcript& transcript,
                  const DetectionConfig& cfg);

// Merges sorted spans whose gap is <= merge_gap; merged validation is the
// weakest member verdict. With a transcript, merged text/indexes are rebuilt
// over the filled entry range so Validated spans stay contiguous.
std::vector<AdSpan> merge_spans(std::vector<AdSpan> spans, double merge_gap,
                                const Transcript* transcript = nullptr);

// Overlapping entry-index windows, each fitting the prompt budget; consecutive
// windows share >= overlap_s seconds. Pairs are [first, last] inclusive.
std::vector<std::pair<int, int>> window_transcript(const Transcript& transcript,
                                                   const PromptTemplates& templates,
                                                   size_t budget_chars, double overlap_s);

// Full per-transcript detection: LightClean prompt, cached completion,
// tolerant parse (one bypass-cache retry on garbled replies), alignment,
// window-dedup and merging. Invalid records are dropped and logged.
DetectionResult detect_ads(const Transcript& transcript, Gateway& gateway,
                           const PromptTemplates& templates, const DetectionConfig& cfg);

// Persistence: one JSON document per video; JSONL concatenation for analytics.
std::string detection_to_json(const DetectionResult& result);
DetectionResult detection_from_json(const std::string& text);

}  // namespace sponsorscan
