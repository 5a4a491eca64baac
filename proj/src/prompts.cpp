#include "sponsorscan/prompts.hpp"

#include <filesystem>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/util.hpp"

namespace sponsorscan {

PromptTemplates PromptTemplates::load(const std::string& prompts_dir) {
  namespace fs = std::filesystem;
  PromptTemplates t;
  t.ad_prompt = read_file((fs::path(prompts_dir) / "ad_prompt.txt").string());
  t.group_prompt = read_file((fs::path(prompts_dir) / "group_prompt.txt").string());
  if (t.ad_prompt.empty() || t.group_prompt.empty())
    raise(Errc::InvalidConfig, "empty prompt template in " + prompts_dir);
  return t;
}

namespace {

void check_budget(const std::string& prompt, const PromptBudget& budget) {
  if (budget.max_chars > 0 && prompt.size() > budget.max_chars)
    raise(Errc::ContextTooLong, "prompt is " + std::to_string(prompt.size()) +
                                    " chars, budget " + std::to_string(budget.max_chars));
}

}  // namespace

std::string render_ad_prompt(const PromptTemplates& templates,
                             const std::vector<CaptionEntry>& entries,
                             const PromptBudget& budget) {
  if (entries.empty()) raise(Errc::Precondition, "render_ad_prompt needs at least one entry");
  std::vector<LlmRecord> records;
  records.reserve(entries.size());
  for (const auto& e : entries) records.push_back({e.text, e.start, e.duration});
  std::string prompt = templates.ad_prompt;
  if (!prompt.empty() && prompt.back() != '\n') prompt += '\n';
  prompt += serialize_record_list(records);
  prompt += '\n';
  check_budget(prompt, budget);
  return prompt;
}

std::string render_group_prompt(const PromptTemplates& templates,
                                const std::vector<std::string>& keywords,
                                const PromptBudget& budget) {
  if (keywords.empty()) raise(Errc::Precondition, "render_group_prompt needs keywords");
  std::string prompt = templates.group_prompt;
  if (!prompt.empty() && prompt.back() != '\n') prompt += '\n';
  prompt += join(keywords, "\n");
  prompt += '\n';
  check_budget(prompt, budget);
  return prompt;
}

}  // namespace sponsorscan
