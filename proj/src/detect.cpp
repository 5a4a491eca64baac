#include "sponsorscan/detect.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/log.hpp"
#include "sponsorscan/textprep.hpp"
#include "sponsorscan/util.hpp"

using nlohmann::json;

namespace sponsorscan {

const char* validation_name(SpanValidation v) {
  switch (v) {
    case SpanValidation::Validated: return "validated";
    case SpanValidation::Unvalidated: return "unvalidated";
    case SpanValidation::Rejected: return "rejected";
  }
  return "rejected";
}

SpanValidation validation_from_name(const std::string& name) {
  if (name == "validated") return SpanValidation::Validated;
  if (name == "unvalidated") return SpanValidation::Unvalidated;
  return SpanValidation::Rejected;
}

double token_jaccard(const std::string& a, const std::string& b) {
  auto ta = tokenize(clean_text(a));
  auto tb = tokenize(clean_text(b));
  std::unordered_set<std::string> sa(ta.begin(), ta.end());
  std::unordered_set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  if (sa.empty() || sb.empty()) return 0.0;
  size_t inter = 0;
  for (const auto& t : sa)
    if (sb.count(t)) ++inter;
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

AdSpan align_span(const LlmRecord& record, const Transcript& transcript,
                  const DetectionConfig& cfg) {
  AdSpan claimed;
  claimed.start = record.start;
  claimed.end = record.start + std::max(record.duration, 1e-3);
  claimed.text = record.text;
  claimed.validation = SpanValidation::Rejected;

  const auto& entries = transcript.entries;
  if (entries.empty()) return claimed;

  int anchor = 0;
  double best_offset = std::abs(entries[0].start - record.start);
  for (int i = 1; i < static_cast<int>(entries.size()); ++i) {
    double offset = std::abs(entries[static_cast<size_t>(i)].start - record.start);
    if (offset < best_offset) {
      best_offset = offset;
      anchor = i;
    }
  }
  if (best_offset > cfg.time_tol) return claimed;

  auto record_tokens = tokenize(clean_text(record.text));
  std::unordered_set<std::string> record_set(record_tokens.begin(), record_tokens.end());
  if (record_set.empty()) return claimed;

  // walk forward accumulating entries; keep the end with the best Jaccard
  std::unordered_set<std::string> acc;
  size_t acc_count = 0;
  int best_last = anchor;
  double best_sim = -1.0;
  const size_t token_cap = record_tokens.size() * 2 + 8;
  for (int j = anchor; j < static_cast<int>(entries.size()); ++j) {
    auto toks = tokenize(clean_text(entries[static_cast<size_t>(j)].text));
    acc_count += toks.size();
    for (auto& t : toks) acc.insert(std::move(t));
    size_t inter = 0;
    for (const auto& t : acc)
      if (record_set.count(t)) ++inter;
    double sim = static_cast<double>(inter) /
                 static_cast<double>(acc.size() + record_set.size() - inter);
    if (sim > best_sim) {
      best_sim = sim;
      best_last = j;
    }
    if (acc_count > token_cap) break;
  }

  if (best_sim < cfg.sim_floor) return claimed;

  AdSpan span;
  span.entry_indexes.resize(static_cast<size_t>(best_last - anchor + 1));
  for (int j = anchor; j <= best_last; ++j)
    span.entry_indexes[static_cast<size_t>(j - anchor)] = j;
  span.start = entries[static_cast<size_t>(anchor)].start;
  span.end = std::max(entries[static_cast<size_t>(best_last)].end(), span.start + 1e-3);
  std::vector<std::string> texts;
  for (int j = anchor; j <= best_last; ++j) texts.push_back(entries[static_cast<size_t>(j)].text);
  span.text = join(texts, " ");
  span.validation =
      best_sim >= cfg.sim_tol ? SpanValidation::Validated : SpanValidation::Unvalidated;
  return span;
}

namespace {

SpanValidation weakest(SpanValidation a, SpanValidation b) {
  return static_cast<int>(a) < static_cast<int>(b) ? a : b;
}

void rebuild_from_indexes(AdSpan& span, const Transcript& transcript) {
  if (span.entry_indexes.empty()) return;
  int first = span.entry_indexes.front();
  int last = span.entry_indexes.back();
  span.entry_indexes.resize(static_cast<size_t>(last - first + 1));
  std::vector<std::string> texts;
  for (int j = first; j <= last; ++j) {
    span.entry_indexes[static_cast<size_t>(j - first)] = j;
    texts.push_back(transcript.entries[static_cast<size_t>(j)].text);
  }
  span.text = join(texts, " ");
}

}  // namespace

std::vector<AdSpan> merge_spans(std::vector<AdSpan> spans, double merge_gap,
                                const Transcript* transcript) {
  if (spans.size() < 2) return spans;
  std::vector<AdSpan> merged;
  merged.push_back(spans.front());
  for (size_t i = 1; i < spans.size(); ++i) {
    AdSpan& prev = merged.back();
    const AdSpan& next = spans[i];
    if (next.start - prev.end <= merge_gap) {
      bool rebuild = transcript && !prev.entry_indexes.empty() && !next.entry_indexes.empty();
      prev.end = std::max(prev.end, next.end);
      prev.validation = weakest(prev.validation, next.validation);
      prev.entry_indexes.insert(prev.entry_indexes.end(), next.entry_indexes.begin(),
                                next.entry_indexes.end());
      std::sort(prev.entry_indexes.begin(), prev.entry_indexes.end());
      prev.entry_indexes.erase(std::unique(prev.entry_indexes.begin(), prev.entry_indexes.end()),
                               prev.entry_indexes.end());
      if (rebuild) rebuild_from_indexes(prev, *transcript);
      else prev.text += " " + next.text;
    } else {
      merged.push_back(next);
    }
  }
  return merged;
}

std::vector<std::pair<int, int>> window_transcript(const Transcript& transcript,
                                                   const PromptTemplates& templates,
                                                   size_t budget_chars, double overlap_s) {
  const auto& entries = transcript.entries;
  if (entries.empty()) return {};
  {
    std::vector<CaptionEntry> cleaned;
    cleaned.reserve(entries.size());
    for (const auto& e : entries) {
      std::string text = clean_text(e.text);
      cleaned.push_back({text.empty() ? "-" : text, e.start, e.duration});
    }
    if (render_ad_prompt(templates, cleaned, PromptBudget{0}).size() <= budget_chars)
      return {{0, static_cast<int>(entries.size()) - 1}};
  }
  const size_t base_cost = templates.ad_prompt.size() + 8;
  std::vector<size_t> entry_cost(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) {
    LlmRecord rec{clean_text(entries[i].text), entries[i].start, entries[i].duration};
    entry_cost[i] = serialize_record_list({rec}).size();
  }

  std::vector<std::pair<int, int>> windows;
  int first = 0;
  while (first < static_cast<int>(entries.size())) {
    size_t cost = base_cost;
    int last = first;
    while (last < static_cast<int>(entries.size())) {
      size_t next_cost = cost + entry_cost[static_cast<size_t>(last)];
      if (next_cost > budget_chars && last > first) break;
      cost = next_cost;
      ++last;
    }
    --last;  // last entry actually included
    windows.push_back({first, last});
    if (last + 1 >= static_cast<int>(entries.size())) break;
    // the next window re-covers the trailing overlap_s of this one (stepping
    // back to the entry straddling the boundary), and always advances
    double resume_at = entries[static_cast<size_t>(last)].end() - overlap_s;
    int idx = first + 1;
    while (idx <= last && entries[static_cast<size_t>(idx)].start < resume_at) ++idx;
    first = std::max(first + 1, idx - 1);
  }
  return windows;
}

namespace {

double overlap_len(const AdSpan& a, const AdSpan& b) {
  return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

// windows can report the same ad twice; keep the longer of heavily
// overlapping spans before interval merging
std::vector<AdSpan> dedup_overlaps(std::vector<AdSpan> spans) {
  std::stable_sort(spans.begin(), spans.end(), [](const AdSpan& a, const AdSpan& b) {
    if (a.start != b.start) return a.start < b.start;
    return (a.end - a.start) > (b.end - b.start);
  });
  std::vector<AdSpan> kept;
  for (const auto& span : spans) {
    bool duplicate = false;
    for (auto& k : kept) {
      double shorter = std::min(span.end - span.start, k.end - k.start);
      if (shorter > 0 && overlap_len(span, k) / shorter >= 0.5) {
        if (span.end - span.start > k.end - k.start) k = span;
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(span);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const AdSpan& a, const AdSpan& b) {
    return a.start < b.start;
  });
  return kept;
}

}  // namespace

namespace {

DetectionResult detect_ads_at_budget(const Transcript& transcript, Gateway& gateway,
                                     const PromptTemplates& templates,
                                     const DetectionConfig& cfg);

}  // namespace

DetectionResult detect_ads(const Transcript& transcript, Gateway& gateway,
                           const PromptTemplates& templates, const DetectionConfig& cfg) {
  if (transcript.entries.empty())
    raise(Errc::Precondition, "transcript " + transcript.video_id + " has no entries");

  // the char budget is an estimate; if the backend still rejects a window as
  // too long, re-window at half the size that actually went over
  size_t whole_size = 0;
  for (const auto& e : transcript.entries) whole_size += clean_text(e.text).size() + 48;
  whole_size += templates.ad_prompt.size();

  DetectionConfig attempt_cfg = cfg;
  for (int shrink = 0;; ++shrink) {
    try {
      return detect_ads_at_budget(transcript, gateway, templates, attempt_cfg);
    } catch (const Error& e) {
      if (e.code() != Errc::ContextTooLong || shrink >= 6) throw;
      size_t budget = attempt_cfg.prompt_budget_chars == 0 ? whole_size
                                                           : attempt_cfg.prompt_budget_chars;
      budget = std::min(budget, whole_size);
      attempt_cfg.prompt_budget_chars = std::max<size_t>(budget / 2, 512);
      logging::warn(transcript.video_id + ": backend rejected prompt size, re-windowing at " +
                    std::to_string(attempt_cfg.prompt_budget_chars) + " chars");
    }
  }
}

namespace {

DetectionResult detect_ads_at_budget(const Transcript& transcript, Gateway& gateway,
                                     const PromptTemplates& templates,
                                     const DetectionConfig& cfg) {
  std::vector<CaptionEntry> cleaned;
  cleaned.reserve(transcript.entries.size());
  for (const auto& e : transcript.entries) {
    std::string text = clean_text(e.text);
    if (text.empty()) text = "-";  // keep positions; record shape needs non-empty text
    cleaned.push_back({text, e.start, e.duration});
  }

  PromptBudget budget{cfg.prompt_budget_chars};
  std::vector<std::pair<int, int>> windows;
  std::string whole = render_ad_prompt(templates, cleaned, PromptBudget{0});
  if (budget.max_chars == 0 || whole.size() <= budget.max_chars) {
    windows.push_back({0, static_cast<int>(cleaned.size()) - 1});
  } else {
    windows = window_transcript(transcript, templates, budget.max_chars, cfg.window_overlap_s);
  }

  DetectionResult result;
  result.video_id = transcript.video_id;
  std::vector<AdSpan> spans;
  std::vector<std::string> raw_parts;

  for (const auto& [first, last] : windows) {
    std::vector<CaptionEntry> slice(cleaned.begin() + first, cleaned.begin() + last + 1);
    ChatRequest req;
    req.user = render_ad_prompt(templates, slice, PromptBudget{0});
    ChatResponse resp = gateway.complete_cached(req);
    result.model_id = req.model_id;

    RecordListReply reply;
    try {
      reply = parse_llm_record_list(resp.content);
    } catch (const Error& e) {
      if (e.code() != Errc::Unparseable) throw;
      logging::warn(transcript.video_id + ": garbled reply, retrying once without cache");
      resp = gateway.complete_cached(req, /*bypass_cache=*/true);
      reply = parse_llm_record_list(resp.content);  // second failure propagates
    }
    raw_parts.push_back(resp.content);
    if (reply.no_ad) continue;

    for (const auto& fragment : reply.invalid)
      logging::warn(transcript.video_id + ": dropped invalid record " + fragment);
    for (const auto& rec : reply.records) {
      if (!(rec.duration > 0) || !std::isfinite(rec.start)) {
        logging::warn(transcript.video_id + ": dropped record with non-positive duration");
        continue;
      }
      spans.push_back(align_span(rec, transcript, cfg));
    }
  }

  result.raw_response = join(raw_parts, "\n---\n");
  spans = dedup_overlaps(std::move(spans));
  result.spans = merge_spans(std::move(spans), cfg.merge_gap, &transcript);
  for (const auto& span : result.spans)
    if (span.validation != SpanValidation::Rejected) result.has_ad = true;
  return result;
}

}  // namespace

std::string detection_to_json(const DetectionResult& result) {
  nlohmann::ordered_json doc;
  doc["video_id"] = result.video_id;
  doc["model_id"] = result.model_id;
  doc["has_ad"] = result.has_ad;
  doc["spans"] = json::array();
  for (const auto& span : result.spans) {
    nlohmann::ordered_json s;
    s["start"] = span.start;
    s["end"] = span.end;
    s["text"] = span.text;
    s["validation"] = validation_name(span.validation);
    doc["spans"].push_back(s);
  }
  doc["raw_response"] = result.raw_response;
  return doc.dump(2) + "\n";
}

DetectionResult detection_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) raise(Errc::MalformedInput, "detection document is not valid JSON");
  DetectionResult result;
  result.video_id = doc.value("video_id", "");
  result.model_id = doc.value("model_id", "");
  result.has_ad = doc.value("has_ad", false);
  result.raw_response = doc.value("raw_response", "");
  for (const auto& s : doc.value("spans", json::array())) {
    AdSpan span;
    span.start = s.value("start", 0.0);
    span.end = s.value("end", 0.0);
    span.text = s.value("text", "");
    span.validation = validation_from_name(s.value("validation", "rejected"));
    result.spans.push_back(std::move(span));
  }
  return result;
}

}  // namespace sponsorscan
