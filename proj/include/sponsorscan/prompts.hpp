#pragma once

#include <string>
#include <vector>

#include "sponsorscan/reply_parse.hpp"
#include "sponsorscan/transcript.hpp"

namespace sponsorscan {

/// Fixed instruction texts prepended to per-call payloads. Loaded verbatim
/// from data files so the wording is pinned, not compiled in.
struct PromptTemplates {
  std::string ad_prompt;
  std::string group_prompt;

  static PromptTemplates load(const std::string& prompts_dir);
};

/// Request size ceiling, estimated at ~4 characters/token.
struct PromptBudget {
  size_t max_chars = 100000;
};

// Template text followed by the transcript serialized as the record-list
// shape the template asks for. Throws Error(ContextTooLong) when the result
// exceeds the budget (the caller windows the transcript) and
// Error(Precondition) on empty input.
std::string render_ad_prompt(const PromptTemplates& templates,
                             const std::vector<CaptionEntry>& entries,
                             const PromptBudget& budget = {});

// Template text followed by the keywords, one per line.
std::string render_group_prompt(const PromptTemplates& templates,
                                const std::vector<std::string>& keywords,
                                const PromptBudget& budget = {});

}  // namespace sponsorscan
