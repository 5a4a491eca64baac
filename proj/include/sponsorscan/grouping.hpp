#pragma once

#include <map>
#include <string>
#include <vector>

#include "sponsorscan/embed.hpp"
#include "sponsorscan/keywords.hpp"
#include "sponsorscan/llm.hpp"

namespace sponsorscan {

struct BatchAudit {
  int batch = 1;
  int input_count = 0;
  int output_count = 0;
  std::string cache_key;
};

struct GroupingRound {
  int round_index = 1;
  std::vector<std::string> input_keywords;
  std::vector<std::string> output_groups;
  int batch_count = 0;
  std::vector<BatchAudit> batches;
  std::vector<std::string> warnings;  // passthrough batches etc.
};

struct GroupingConfig {
  int batch_size = 300;
  int max_rounds = 5;
  PromptBudget budget;
};

// One reduction pass: keywords split into batches, each sent with the
// grouping prompt; parsed labels are concatenated and deduplicated. A batch
// that fails to reduce is retried once (bypassing the cache), then passed
// through unchanged with a warning; gateway failures also pass through.
GroupingRound group_round(const std::vector<std::string>& keywords, Gateway& gateway,
                          const PromptTemplates& templates, const GroupingConfig& cfg,
                          int round_index = 1);

// Repeats group_round until the output is at or below target_count, no
// reduction happened, or max_rounds is hit. Input already at or below the
// target yields zero rounds.
std::vector<GroupingRound> group_cascade(const std::vector<std::string>& keywords,
                                         Gateway& gateway, const PromptTemplates& templates,
                                         int target_count, const GroupingConfig& cfg);

// Audit log: one JSONL record per round per batch:
//   {stage, round, batch, input_count, output_count, cache_key}
std::string audit_log_to_jsonl(const std::string& stage, const std::vector<GroupingRound>& rounds);

struct AuditRecord {
  std::string stage;
  int round = 0;
  int batch = 0;
  int input_count = 0;
  int output_count = 0;
  std::string cache_key;
};

std::vector<AuditRecord> parse_audit_log(const std::string& jsonl);

struct CascadeShape {
  std::vector<int> round_sizes;  // input of round 1, then each round's output
  bool strictly_decreasing = false;
};

CascadeShape cascade_shape(const std::vector<AuditRecord>& records);

using KeywordCategoryMap = std::map<std::string, std::string>;

// Nearest-label assignment: each keyword goes to the final category whose
// label embedding has maximal cosine; ties break by category order.
KeywordCategoryMap assign_keywords(const std::vector<std::string>& keywords,
                                   const std::vector<std::string>& categories,
                                   EmbeddingProvider& provider);

struct CategoryAssignment {
  KeywordCategoryMap keyword_category;  // populated per side by the caller
  std::map<std::string, std::string> video_content_category;
  std::map<std::string, std::string> video_ad_category;
  std::vector<std::string> videos_without_keywords;  // flagged, excluded from cross-tab
};

// Modal-category vote over each video's keywords (ties: higher summed
// keyword score, then category order).
CategoryAssignment assign_video_categories(
    const std::map<std::string, std::vector<ScoredKeyword>>& content_keywords_by_video,
    const std::map<std::string, std::vector<ScoredKeyword>>& ad_keywords_by_video,
    const KeywordCategoryMap& content_map, const KeywordCategoryMap& ad_map,
    const std::vector<std::string>& content_category_order,
    const std::vector<std::string>& ad_category_order);

// Two-column CSV "keyword,category".
std::string category_map_to_csv(const KeywordCategoryMap& map);
KeywordCategoryMap category_map_from_csv(const std::string& csv);

}  // namespace sponsorscan
