#include "sponsorscan/grouping.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/log.hpp"
#include "sponsorscan/util.hpp"

using nlohmann::json;

namespace sponsorscan {

namespace {

struct BatchOutcome {
  std::vector<std::string> groups;
  std::string cache_key;
  std::string warning;  // empty when the batch reduced normally
  int input_count = 0;
};

BatchOutcome run_batch(const std::vector<std::string>& batch, Gateway& gateway,
                       const PromptTemplates& templates, const GroupingConfig& cfg) {
  BatchOutcome outcome;
  outcome.input_count = static_cast<int>(batch.size());
  ChatRequest req;
  req.user = render_group_prompt(templates, batch, cfg.budget);
  outcome.cache_key = cache_key(req);

  try {
    bool from_cache = false;
    ChatResponse resp = gateway.complete_cached(req, false, &from_cache);
    std::vector<std::string> groups = parse_llm_string_list(resp.content);
    if (groups.empty() || groups.size() >= batch.size()) {
      // a cached reply is the settled outcome of an earlier attempt; only a
      // fresh non-reducing reply earns the one-shot resample
      if (batch.size() > 1 && !from_cache) {
        logging::warn("grouping batch did not reduce (" + std::to_string(batch.size()) + " -> " +
                      std::to_string(groups.size()) + "), retrying once");
        groups = parse_llm_string_list(gateway.complete_cached(req, true).content);
      }
      if (groups.empty() || (groups.size() >= batch.size() && batch.size() > 1)) {
        outcome.warning = "batch passed through unchanged (no reduction after retry)";
        outcome.groups = batch;
        return outcome;
      }
    }
    outcome.groups = std::move(groups);
    return outcome;
  } catch (const Error& e) {
    outcome.warning = std::string("batch passed through unchanged (") + e.what() + ")";
    outcome.groups = batch;
    return outcome;
  }
}

// splits recursively when the rendered prompt would blow the budget
void run_batch_or_split(const std::vector<std::string>& batch, Gateway& gateway,
                        const PromptTemplates& templates, const GroupingConfig& cfg,
                        std::vector<BatchOutcome>& outcomes) {
  bool too_long = false;
  try {
    render_group_prompt(templates, batch, cfg.budget);
  } catch (const Error& e) {
    if (e.code() != Errc::ContextTooLong) throw;
    too_long = true;
  }
  if (too_long && batch.size() > 1) {
    size_t half = batch.size() / 2;
    run_batch_or_split({batch.begin(), batch.begin() + static_cast<long>(half)}, gateway,
                       templates, cfg, outcomes);
    run_batch_or_split({batch.begin() + static_cast<long>(half), batch.end()}, gateway, templates,
                       cfg, outcomes);
    return;
  }
  outcomes.push_back(run_batch(batch, gateway, templates, cfg));
}

}  // namespace

GroupingRound group_round(const std::vector<std::string>& keywords, Gateway& gateway,
                          const PromptTemplates& templates, const GroupingConfig& cfg,
                          int round_index) {
  if (keywords.empty()) raise(Errc::Precondition, "group_round needs a non-empty keyword list");
  GroupingRound round;
  round.round_index = round_index;
  round.input_keywords = keywords;

  std::vector<BatchOutcome> outcomes;
  const size_t batch_size = std::max(1, cfg.batch_size);
  for (size_t begin = 0; begin < keywords.size(); begin += batch_size) {
    size_t end = std::min(keywords.size(), begin + batch_size);
    std::vector<std::string> batch(keywords.begin() + static_cast<long>(begin),
                                   keywords.begin() + static_cast<long>(end));
    run_batch_or_split(batch, gateway, templates, cfg, outcomes);
  }

  round.batch_count = static_cast<int>(outcomes.size());
  std::unordered_set<std::string> seen;
  int batch_index = 0;
  for (const auto& outcome : outcomes) {
    ++batch_index;
    BatchAudit audit;
    audit.batch = batch_index;
    audit.input_count = outcome.input_count;
    audit.output_count = static_cast<int>(outcome.groups.size());
    audit.cache_key = outcome.cache_key;
    round.batches.push_back(audit);
    if (!outcome.warning.empty())
      round.warnings.push_back("batch " + std::to_string(batch_index) + ": " + outcome.warning);
    for (const auto& g : outcome.groups)
      if (seen.insert(g).second) round.output_groups.push_back(g);
  }
  return round;
}

std::vector<GroupingRound> group_cascade(const std::vector<std::string>& keywords,
                                         Gateway& gateway, const PromptTemplates& templates,
                                         int target_count, const GroupingConfig& cfg) {
  if (target_count < 1) raise(Errc::Precondition, "target_count must be >= 1");
  std::vector<GroupingRound> rounds;
  std::vector<std::string> current = keywords;
  if (static_cast<int>(current.size()) <= target_count) return rounds;

  for (int r = 1; r <= cfg.max_rounds; ++r) {
    GroupingRound round = group_round(current, gateway, templates, cfg, r);
    size_t out_size = round.output_groups.size();
    size_t in_size = current.size();
    rounds.push_back(round);
    current = rounds.back().output_groups;
    if (static_cast<int>(out_size) <= target_count) break;
    if (out_size >= in_size) {
      logging::warn("grouping cascade stalled at round " + std::to_string(r) + " (" +
                    std::to_string(in_size) + " -> " + std::to_string(out_size) + ")");
      break;
    }
  }
  return rounds;
}

std::string audit_log_to_jsonl(const std::string& stage,
                               const std::vector<GroupingRound>& rounds) {
  std::string out;
  for (const auto& round : rounds) {
    for (const auto& audit : round.batches) {
      nlohmann::ordered_json rec;
      rec["stage"] = stage;
      rec["round"] = round.round_index;
      rec["batch"] = audit.batch;
      rec["input_count"] = audit.input_count;
      rec["output_count"] = audit.output_count;
      rec["cache_key"] = audit.cache_key;
      out += rec.dump() + "\n";
    }
  }
  return out;
}

std::vector<AuditRecord> parse_audit_log(const std::string& jsonl) {
  std::vector<AuditRecord> records;
  for (const auto& line : split_lines(jsonl)) {
    if (trim(line).empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) raise(Errc::MalformedInput, "bad audit log line: " + line);
    AuditRecord rec;
    rec.stage = doc.value("stage", "");
    rec.round = doc.value("round", 0);
    rec.batch = doc.value("batch", 0);
    rec.input_count = doc.value("input_count", 0);
    rec.output_count = doc.value("output_count", 0);
    rec.cache_key = doc.value("cache_key", "");
    records.push_back(std::move(rec));
  }
  return records;
}

CascadeShape cascade_shape(const std::vector<AuditRecord>& records) {
  std::map<int, std::pair<int, int>> totals;  // round -> (input, output)
  for (const auto& rec : records) {
    totals[rec.round].first += rec.input_count;
    totals[rec.round].second += rec.output_count;
  }
  CascadeShape shape;
  for (const auto& [round, io] : totals) {
    if (shape.round_sizes.empty()) shape.round_sizes.push_back(io.first);
    shape.round_sizes.push_back(io.second);
  }
  shape.strictly_decreasing = true;
  for (size_t i = 1; i < shape.round_sizes.size(); ++i)
    if (shape.round_sizes[i] >= shape.round_sizes[i - 1]) shape.strictly_decreasing = false;
  return shape;
}

KeywordCategoryMap assign_keywords(const std::vector<std::string>& keywords,
                                   const std::vector<std::string>& categories,
                                   EmbeddingProvider& provider) {
  if (categories.empty()) raise(Errc::Precondition, "assign_keywords needs final categories");
  KeywordCategoryMap map;
  if (keywords.empty()) return map;

  auto cat_vecs = provider.embed_batch(categories);
  auto kw_vecs = provider.embed_batch(keywords);
  for (size_t i = 0; i < keywords.size(); ++i) {
    size_t best = 0;
    double best_sim = -2.0;
    for (size_t c = 0; c < categories.size(); ++c) {
      double sim = cosine(kw_vecs[i], cat_vecs[c]);
      if (sim > best_sim) {  // exact tie keeps the earlier category
        best_sim = sim;
        best = c;
      }
    }
    map[keywords[i]] = categories[best];
  }
  return map;
}

namespace {

// modal category; ties by higher summed keyword score, then category order
std::string vote(const std::vector<ScoredKeyword>& keywords, const KeywordCategoryMap& map,
                 const std::vector<std::string>& category_order) {
  std::map<std::string, int> counts;
  std::map<std::string, double> score_sums;
  for (const auto& kw : keywords) {
    auto it = map.find(kw.phrase);
    if (it == map.end()) continue;
    counts[it->second] += 1;
    score_sums[it->second] += kw.score;
  }
  if (counts.empty()) return "";
  std::string best;
  for (const auto& category : category_order) {
    auto it = counts.find(category);
    if (it == counts.end()) continue;
    if (best.empty()) {
      best = category;
      continue;
    }
    if (it->second > counts[best] ||
        (it->second == counts[best] && score_sums[category] > score_sums[best]))
      best = category;
  }
  // categories outside the declared order still participate, after it
  for (const auto& [category, count] : counts) {
    if (std::find(category_order.begin(), category_order.end(), category) !=
        category_order.end())
      continue;
    if (best.empty() || count > counts[best] ||
        (count == counts[best] && score_sums[category] > score_sums[best]))
      best = category;
  }
  return best;
}

}  // namespace

CategoryAssignment assign_video_categories(
    const std::map<std::string, std::vector<ScoredKeyword>>& content_keywords_by_video,
    const std::map<std::string, std::vector<ScoredKeyword>>& ad_keywords_by_video,
    const KeywordCategoryMap& content_map, const KeywordCategoryMap& ad_map,
    const std::vector<std::string>& content_category_order,
    const std::vector<std::string>& ad_category_order) {
  CategoryAssignment assignment;
  for (const auto& [video_id, keywords] : content_keywords_by_video) {
    std::string category = vote(keywords, content_map, content_category_order);
    if (category.empty()) assignment.videos_without_keywords.push_back(video_id);
    else assignment.video_content_category[video_id] = category;
  }
  for (const auto& [video_id, keywords] : ad_keywords_by_video) {
    std::string category = vote(keywords, ad_map, ad_category_order);
    if (!category.empty()) assignment.video_ad_category[video_id] = category;
  }
  return assignment;
}

std::string category_map_to_csv(const KeywordCategoryMap& map) {
  std::string out = "keyword,category\n";
  for (const auto& [keyword, category] : map)
    out += csv_escape(keyword) + "," + csv_escape(category) + "\n";
  return out;
}

KeywordCategoryMap category_map_from_csv(const std::string& csv) {
  KeywordCategoryMap map;
  auto lines = split_lines(csv);
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto fields = csv_split(lines[i]);
    if (fields.size() != 2)
      raise(Errc::MalformedInput, "category CSV line " + std::to_string(i + 1));
    map[fields[0]] = fields[1];
  }
  return map;
}

}  // namespace sponsorscan
