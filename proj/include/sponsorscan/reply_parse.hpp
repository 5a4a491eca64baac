#pragma once

#include <string>
#include <vector>

namespace sponsorscan {

/// One ad record as claimed by the model: a {text, start, duration} dict.
struct LlmRecord {
  std::string text;
  double start = 0.0;
  double duration = 0.0;
};

/// Verdict of parsing an ad-detection reply. Exactly one of: no_ad, or a
/// non-empty record list (valid records plus dropped-invalid fragments).
/// An empty list in the reply counts as no_ad; replies with neither a list
/// nor a None literal throw Error(Unparseable).
struct RecordListReply {
  bool no_ad = false;
  std::vector<LlmRecord> records;
  std::vector<std::string> invalid;  // offending fragments, one per dropped record
};

// Tolerant extraction: strips Markdown code fences; accepts single- or
// double-quoted strings, bare keys, trailing commas, int or float times,
// and the literals None/null/NONE; takes the first well-formed bracketed
// list even when surrounded by prose.
RecordListReply parse_llm_record_list(const std::string& content);

// Tolerant "[item, item, ...]" extraction for grouping replies: quotes
// optional, items trimmed, empties dropped, duplicates removed keeping the
// first occurrence. Throws Error(Unparseable) when no bracketed list exists.
std::vector<std::string> parse_llm_string_list(const std::string& content);

// Renders records in the single-quoted dict-list shape the ad prompt asks
// for; parse_llm_record_list() inverts it exactly.
std::string serialize_record_list(const std::vector<LlmRecord>& records);

}  // namespace sponsorscan
