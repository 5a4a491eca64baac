#include "sponsorscan/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_set>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/util.hpp"

using nlohmann::json;

namespace sponsorscan {

std::vector<PrevalenceRow> prevalence_table(const std::vector<DetectionResult>& detections,
                                            const CorpusManifest& manifest) {
  struct Tally {
    int collected = 0;
    int detected = 0;
  };
  std::map<std::string, std::map<TranscriptKind, Tally>> tallies;
  std::map<std::string, const ManifestRecord*> by_id;
  for (const auto& rec : manifest.records) {
    tallies[rec.channel][rec.kind].collected += 1;
    by_id[rec.video_id] = &rec;
  }
  for (const auto& det : detections) {
    auto it = by_id.find(det.video_id);
    if (it == by_id.end()) raise(Errc::UnknownVideoId, det.video_id);
    if (det.has_ad) tallies[it->second->channel][it->second->kind].detected += 1;
  }

  auto make_row = [](const std::string& channel, TranscriptKind kind, const Tally& tally) {
    PrevalenceRow row;
    row.channel = channel;
    row.kind = kind;
    row.detected = tally.detected;
    row.collected = tally.collected;
    if (tally.collected > 0)
      row.prevalence_pct = static_cast<int>(
          std::llround(100.0 * tally.detected / tally.collected));
    return row;
  };

  std::vector<PrevalenceRow> rows;
  Tally total_gen, total_man;
  for (const auto& [channel, kinds] : tallies) {
    for (TranscriptKind kind : {TranscriptKind::Generated, TranscriptKind::Manual}) {
      auto it = kinds.find(kind);
      if (it == kinds.end() || it->second.collected == 0) continue;
      rows.push_back(make_row(channel, kind, it->second));
      Tally& total = kind == TranscriptKind::Generated ? total_gen : total_man;
      total.collected += it->second.collected;
      total.detected += it->second.detected;
    }
  }
  rows.push_back(make_row("Total", TranscriptKind::Generated, total_gen));
  rows.push_back(make_row("Total", TranscriptKind::Manual, total_man));
  return rows;
}

CrossTab cross_tab(const CategoryAssignment& assignment,
                   const std::vector<DetectionResult>& detections) {
  CrossTab tab;
  std::set<std::string> content_set, ad_set;
  for (const auto& det : detections) {
    if (!det.has_ad) continue;
    auto content = assignment.video_content_category.find(det.video_id);
    auto ad = assignment.video_ad_category.find(det.video_id);
    if (content == assignment.video_content_category.end() ||
        ad == assignment.video_ad_category.end()) {
      tab.uncategorized += 1;
      continue;
    }
    tab.cells[{content->second, ad->second}] += 1;
    tab.content_marginals[content->second] += 1;
    tab.ad_marginals[ad->second] += 1;
    tab.total += 1;
    content_set.insert(content->second);
    ad_set.insert(ad->second);
  }
  tab.content_categories.assign(content_set.begin(), content_set.end());
  tab.ad_categories.assign(ad_set.begin(), ad_set.end());
  return tab;
}

AlignmentScore alignment_score(const std::vector<std::string>& ad_phrases,
                               const std::vector<Embedding>& ad_vectors,
                               const std::vector<std::string>& content_phrases,
                               const std::vector<Embedding>& content_vectors) {
  if (ad_phrases.empty() || content_phrases.empty())
    raise(Errc::EmptyKeywordSet, "alignment needs both keyword sets non-empty");

  std::unordered_set<std::string> sa(ad_phrases.begin(), ad_phrases.end());
  std::unordered_set<std::string> sb(content_phrases.begin(), content_phrases.end());
  size_t inter = 0;
  for (const auto& p : sa)
    if (sb.count(p)) ++inter;
  AlignmentScore score;
  score.jaccard = static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);

  auto centroid = [](const std::vector<Embedding>& vectors) {
    Embedding mean = Embedding::Zero(vectors.front().size());
    for (const auto& v : vectors) mean += v;
    mean /= static_cast<float>(vectors.size());
    float norm = mean.norm();
    if (norm > 0) mean /= norm;
    return mean;
  };
  score.centroid_cosine = cosine(centroid(ad_vectors), centroid(content_vectors));
  return score;
}

std::vector<GoldSpans> parse_gold_spans(const std::string& jsonl) {
  std::vector<GoldSpans> out;
  for (const auto& line : split_lines(jsonl)) {
    if (trim(line).empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.contains("video_id"))
      raise(Errc::MalformedInput, "bad gold label line: " + line);
    GoldSpans gold;
    gold.video_id = doc["video_id"].get<std::string>();
    for (const auto& s : doc.value("spans", json::array())) {
      Interval span{s.at("start").get<double>(), s.at("end").get<double>()};
      if (!(span.end > span.start))
        raise(Errc::MalformedInput, "gold span with end <= start for " + gold.video_id);
      gold.spans.push_back(span);
    }
    std::sort(gold.spans.begin(), gold.spans.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    for (size_t i = 1; i < gold.spans.size(); ++i)
      if (gold.spans[i].start < gold.spans[i - 1].end)
        raise(Errc::MalformedInput, "overlapping gold spans for " + gold.video_id);
    out.push_back(std::move(gold));
  }
  return out;
}

std::vector<GoldSpans> load_gold_spans(const std::string& path) {
  return parse_gold_spans(read_file(path));
}

double interval_iou(const Interval& a, const Interval& b) {
  double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  // disjoint intervals: union of lengths, not the hull
  if (inter == 0.0) uni = (a.end - a.start) + (b.end - b.start);
  return uni > 0 ? inter / uni : 0.0;
}

namespace {

std::vector<Interval> merge_union(std::vector<Interval> spans) {
  std::sort(spans.begin(), spans.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.start <= merged.back().end)
      merged.back().end = std::max(merged.back().end, s.end);
    else
      merged.push_back(s);
  }
  return merged;
}

double union_length(const std::vector<Interval>& merged) {
  double total = 0;
  for (const auto& s : merged) total += s.end - s.start;
  return total;
}

double intersection_length(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  double total = 0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double lo = std::max(a[i].start, b[j].start);
    double hi = std::min(a[i].end, b[j].end);
    if (hi > lo) total += hi - lo;
    if (a[i].end < b[j].end) ++i;
    else ++j;
  }
  return total;
}

void check_in_range(const std::vector<Interval>& spans, double duration) {
  for (const auto& s : spans) {
    if (!(s.end > s.start)) raise(Errc::SpanOutOfRange, "span with end <= start");
    if (s.start < -1e-9 || s.end > duration + 1e-9)
      raise(Errc::SpanOutOfRange,
            "span [" + format_seconds(s.start) + ", " + format_seconds(s.end) +
                ") outside [0, " + format_seconds(duration) + "]");
  }
}

double f1_of(double precision, double recall) {
  return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace

EvalMetrics time_level_metrics(const std::vector<Interval>& predicted,
                               const std::vector<Interval>& gold, double video_duration) {
  check_in_range(predicted, video_duration);
  check_in_range(gold, video_duration);
  EvalMetrics m;
  m.level = MetricLevel::TimeLevel;
  if (predicted.empty() && gold.empty()) {
    m.precision = m.recall = m.f1 = 1.0;
    return m;
  }
  if (predicted.empty()) {
    m.precision = 1.0;
    m.recall = 0.0;
    return m;
  }
  if (gold.empty()) {
    m.precision = 0.0;
    m.recall = 1.0;
    return m;
  }
  auto p = merge_union(predicted);
  auto g = merge_union(gold);
  double overlap = intersection_length(p, g);
  m.precision = overlap / union_length(p);
  m.recall = overlap / union_length(g);
  m.f1 = f1_of(m.precision, m.recall);
  return m;
}

EvalMetrics segment_level_metrics(const std::vector<Interval>& predicted,
                                  const std::vector<Interval>& gold, double iou_threshold) {
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0)
    raise(Errc::Precondition, "iou_threshold must be in (0,1]");
  EvalMetrics m;
  m.level = MetricLevel::SegmentLevel;
  m.iou_threshold = iou_threshold;
  if (predicted.empty() && gold.empty()) {
    m.precision = m.recall = m.f1 = 1.0;
    return m;
  }
  if (predicted.empty()) {
    m.precision = 1.0;
    m.recall = 0.0;
    return m;
  }
  if (gold.empty()) {
    m.precision = 0.0;
    m.recall = 1.0;
    return m;
  }

  struct Pair {
    double iou;
    size_t p, g;
  };
  std::vector<Pair> pairs;
  for (size_t i = 0; i < predicted.size(); ++i)
    for (size_t j = 0; j < gold.size(); ++j) {
      double iou = interval_iou(predicted[i], gold[j]);
      if (iou >= iou_threshold) pairs.push_back({iou, i, j});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.p != b.p) return a.p < b.p;
    return a.g < b.g;
  });
  std::vector<bool> p_used(predicted.size(), false), g_used(gold.size(), false);
  int matches = 0;
  for (const auto& pair : pairs) {
    if (p_used[pair.p] || g_used[pair.g]) continue;
    p_used[pair.p] = g_used[pair.g] = true;
    ++matches;
  }
  m.precision = static_cast<double>(matches) / static_cast<double>(predicted.size());
  m.recall = static_cast<double>(matches) / static_cast<double>(gold.size());
  m.f1 = f1_of(m.precision, m.recall);
  return m;
}

// ---- rendering ----

namespace {

std::string pct_cell(const std::optional<int>& pct) {
  return pct ? std::to_string(*pct) + "%" : "-";
}

struct PrevalencePair {
  const PrevalenceRow* generated = nullptr;
  const PrevalenceRow* manual = nullptr;
};

std::vector<std::pair<std::string, PrevalencePair>> pair_rows(
    const std::vector<PrevalenceRow>& rows) {
  std::vector<std::pair<std::string, PrevalencePair>> paired;
  auto slot = [&](const std::string& channel) -> PrevalencePair& {
    for (auto& [name, pair] : paired)
      if (name == channel) return pair;
    paired.push_back({channel, {}});
    return paired.back().second;
  };
  for (const auto& row : rows) {
    auto& pair = slot(row.channel);
    if (row.kind == TranscriptKind::Generated) pair.generated = &row;
    else pair.manual = &row;
  }
  // keep Total last
  std::stable_partition(paired.begin(), paired.end(),
                        [](const auto& p) { return p.first != "Total"; });
  return paired;
}

}  // namespace

std::string render_prevalence_csv(const std::vector<PrevalenceRow>& rows) {
  std::string out = "channel,kind,detected,collected,prevalence_pct\n";
  for (const auto& row : rows) {
    out += csv_escape(row.channel) + "," + kind_name(row.kind) + "," +
           std::to_string(row.detected) + "," + std::to_string(row.collected) + "," +
           (row.prevalence_pct ? std::to_string(*row.prevalence_pct) : "") + "\n";
  }
  return out;
}

std::string render_prevalence_markdown(const std::vector<PrevalenceRow>& rows) {
  std::string out =
      "| Channel | Detected (Generated) | Detected (Manual) | Prevalence (Generated) | "
      "Prevalence (Manual) |\n|---|---|---|---|---|\n";
  for (const auto& [channel, pair] : pair_rows(rows)) {
    out += "| " + channel + " | ";
    out += (pair.generated ? std::to_string(pair.generated->detected) : "-") + std::string(" | ");
    out += (pair.manual ? std::to_string(pair.manual->detected) : "-") + std::string(" | ");
    out += (pair.generated ? pct_cell(pair.generated->prevalence_pct) : "-") + std::string(" | ");
    out += (pair.manual ? pct_cell(pair.manual->prevalence_pct) : "-") + std::string(" |\n");
  }
  return out;
}

std::string render_crosstab_csv(const CrossTab& tab) {
  std::string out = "content_category,ad_category,videos\n";
  for (const auto& [key, count] : tab.cells)
    out += csv_escape(key.first) + "," + csv_escape(key.second) + "," + std::to_string(count) +
           "\n";
  out += ",,\n";  // separator before marginals
  for (const auto& [category, count] : tab.content_marginals)
    out += csv_escape(category) + ",(all)," + std::to_string(count) + "\n";
  for (const auto& [category, count] : tab.ad_marginals)
    out += "(all)," + csv_escape(category) + "," + std::to_string(count) + "\n";
  out += "(all),(all)," + std::to_string(tab.total) + "\n";
  return out;
}

std::string render_crosstab_markdown(const CrossTab& tab) {
  std::string out = "| Content \\ Ad |";
  for (const auto& ad : tab.ad_categories) out += " " + ad + " |";
  out += " Total |\n|---|";
  for (size_t i = 0; i < tab.ad_categories.size() + 1; ++i) out += "---|";
  out += "\n";
  for (const auto& content : tab.content_categories) {
    out += "| " + content + " |";
    for (const auto& ad : tab.ad_categories) {
      auto it = tab.cells.find({content, ad});
      out += " " + std::to_string(it == tab.cells.end() ? 0 : it->second) + " |";
    }
    auto marg = tab.content_marginals.find(content);
    out += " " + std::to_string(marg == tab.content_marginals.end() ? 0 : marg->second) + " |\n";
  }
  out += "| Total |";
  for (const auto& ad : tab.ad_categories) {
    auto it = tab.ad_marginals.find(ad);
    out += " " + std::to_string(it == tab.ad_marginals.end() ? 0 : it->second) + " |";
  }
  out += " " + std::to_string(tab.total) + " |\n";
  if (tab.uncategorized > 0)
    out += "\nUncategorized videos with ads: " + std::to_string(tab.uncategorized) + "\n";
  return out;
}

std::string render_alignment_csv(const std::vector<AlignmentRow>& rows) {
  std::string out = "scope,video_id,content_category,ad_category,jaccard,centroid_cosine\n";
  std::map<std::pair<std::string, std::string>, std::pair<AlignmentScore, int>> means;
  for (const auto& row : rows) {
    out += "video," + csv_escape(row.video_id) + "," + csv_escape(row.content_category) + "," +
           csv_escape(row.ad_category) + "," + format_fixed(row.score.jaccard, 4) + "," +
           format_fixed(row.score.centroid_cosine, 4) + "\n";
    auto& slot = means[{row.content_category, row.ad_category}];
    slot.first.jaccard += row.score.jaccard;
    slot.first.centroid_cosine += row.score.centroid_cosine;
    slot.second += 1;
  }
  for (const auto& [key, slot] : means) {
    out += "category_mean,," + csv_escape(key.first) + "," + csv_escape(key.second) + "," +
           format_fixed(slot.first.jaccard / slot.second, 4) + "," +
           format_fixed(slot.first.centroid_cosine / slot.second, 4) + "\n";
  }
  return out;
}

std::string render_alignment_markdown(const std::vector<AlignmentRow>& rows) {
  std::map<std::pair<std::string, std::string>, std::pair<AlignmentScore, int>> means;
  for (const auto& row : rows) {
    auto& slot = means[{row.content_category, row.ad_category}];
    slot.first.jaccard += row.score.jaccard;
    slot.first.centroid_cosine += row.score.centroid_cosine;
    slot.second += 1;
  }
  std::string out =
      "| Content category | Ad category | Videos | Mean Jaccard | Mean centroid cosine |\n"
      "|---|---|---|---|---|\n";
  for (const auto& [key, slot] : means) {
    out += "| " + key.first + " | " + key.second + " | " + std::to_string(slot.second) + " | " +
           format_fixed(slot.first.jaccard / slot.second, 4) + " | " +
           format_fixed(slot.first.centroid_cosine / slot.second, 4) + " |\n";
  }
  out += "\n| Video | Content | Ad | Jaccard | Centroid cosine |\n|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    out += "| " + row.video_id + " | " + row.content_category + " | " + row.ad_category + " | " +
           format_fixed(row.score.jaccard, 4) + " | " +
           format_fixed(row.score.centroid_cosine, 4) + " |\n";
  }
  return out;
}

std::string render_eval_csv(const std::vector<EvalRow>& rows) {
  std::string out = "video_id,level,precision,recall,f1,iou_threshold\n";
  for (const auto& row : rows) {
    out += csv_escape(row.video_id) + ",time," + format_fixed(row.time_level.precision, 6) + "," +
           format_fixed(row.time_level.recall, 6) + "," + format_fixed(row.time_level.f1, 6) +
           ",\n";
    out += csv_escape(row.video_id) + ",segment," +
           format_fixed(row.segment_level.precision, 6) + "," +
           format_fixed(row.segment_level.recall, 6) + "," +
           format_fixed(row.segment_level.f1, 6) + "," +
           format_fixed(row.segment_level.iou_threshold, 2) + "\n";
  }
  return out;
}

std::string render_eval_markdown(const std::vector<EvalRow>& rows) {
  std::string out =
      "| Video | Time P | Time R | Time F1 | Seg P | Seg R | Seg F1 | IoU thr |\n"
      "|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    out += "| " + row.video_id + " | " + format_fixed(row.time_level.precision, 4) + " | " +
           format_fixed(row.time_level.recall, 4) + " | " + format_fixed(row.time_level.f1, 4) +
           " | " + format_fixed(row.segment_level.precision, 4) + " | " +
           format_fixed(row.segment_level.recall, 4) + " | " +
           format_fixed(row.segment_level.f1, 4) + " | " +
           format_fixed(row.segment_level.iou_threshold, 2) + " |\n";
  }
  return out;
}

std::vector<std::string> emit_reports(const ReportBundle& bundle, const std::string& out_dir) {
  namespace fs = std::filesystem;
  ensure_dir(out_dir);
  std::vector<std::pair<std::string, std::string>> files = {
      {"prevalence.csv", render_prevalence_csv(bundle.prevalence)},
      {"prevalence.md", render_prevalence_markdown(bundle.prevalence)},
      {"crosstab.csv", render_crosstab_csv(bundle.crosstab)},
      {"crosstab.md", render_crosstab_markdown(bundle.crosstab)},
      {"alignment.csv", render_alignment_csv(bundle.alignment)},
      {"alignment.md", render_alignment_markdown(bundle.alignment)},
  };
  if (bundle.has_eval) {
    files.push_back({"eval.csv", render_eval_csv(bundle.eval)});
    files.push_back({"eval.md", render_eval_markdown(bundle.eval)});
  }
  files.push_back({"run_summary.json", bundle.run_summary_json});

  std::vector<std::string> written;
  for (const auto& [name, content] : files) {
    atomic_write_file((fs::path(out_dir) / name).string(), content);
    written.push_back(name);
  }
  return written;
}

}  // namespace sponsorscan
