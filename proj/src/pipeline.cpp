#include "sponsorscan/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/log.hpp"
#include "sponsorscan/textprep.hpp"
#include "sponsorscan/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sponsorscan {

namespace {

constexpr const char* kCorpusToken = "__corpus__";

// testing hook: succeed for the first N calls, then fail every call
class FailAfterBackend : public LlmBackend {
 public:
  FailAfterBackend(std::unique_ptr<LlmBackend> inner, int allow)
      : inner_(std::move(inner)), remaining_(allow) {}

  ChatResponse complete(const ChatRequest& req) override {
    if (remaining_.fetch_sub(1) <= 0)
      raise(Errc::BackendUnavailable, "injected failure (mock_fail_after)");
    return inner_->complete(req);
  }
  std::string name() const override { return inner_->name(); }

 private:
  std::unique_ptr<LlmBackend> inner_;
  std::atomic<int> remaining_;
};

// worker pool bounded by the parallelism limit; returns per-video failures
std::vector<std::pair<std::string, std::string>> run_pool(
    int parallelism, const std::vector<std::string>& video_ids,
    const std::function<void(const std::string&)>& fn) {
  std::vector<std::pair<std::string, std::string>> failures;
  std::mutex failures_mutex;
  std::atomic<size_t> next{0};
  int threads = std::max(1, std::min<int>(parallelism, static_cast<int>(video_ids.size())));

  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= video_ids.size()) return;
      try {
        fn(video_ids[i]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failures_mutex);
        failures.push_back({video_ids[i], e.what()});
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(failures.begin(), failures.end());
  return failures;
}

}  // namespace

struct Pipeline::Runtime {
  PromptTemplates templates;
  PrepContext prep;
  std::unique_ptr<LlmBackend> backend;
  std::unique_ptr<ResponseCache> cache;
  std::unique_ptr<Gateway> gateway;
  std::unique_ptr<EmbeddingProvider> provider;
};

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {}

std::string Pipeline::dir(const std::string& name) const {
  return (fs::path(cfg_.work_dir) / name).string();
}

std::string Pipeline::state_path(const std::string& stage, const std::string& video_id) const {
  return (fs::path(cfg_.work_dir) / "state" / stage / (video_id + ".json")).string();
}

void Pipeline::mark(const std::string& stage, const std::string& video_id, StageStatus status,
                    const std::string& reason) {
  nlohmann::ordered_json doc;
  doc["status"] = status == StageStatus::Done ? "done" : "failed";
  if (!reason.empty()) doc["reason"] = reason;
  atomic_write_file(state_path(stage, video_id), doc.dump() + "\n");
}

StageStatus Pipeline::stage_status(const std::string& stage, const std::string& video_id) const {
  std::string path = state_path(stage, video_id);
  if (!file_exists(path)) return StageStatus::Pending;
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) return StageStatus::Pending;  // half-written state is no state
  return doc.value("status", "") == "done" ? StageStatus::Done : StageStatus::Failed;
}

std::vector<std::string> Pipeline::videos_done(const std::string& stage) const {
  std::vector<std::string> done;
  for (const auto& name : list_files((fs::path(cfg_.work_dir) / "state" / stage).string(),
                                     ".json")) {
    std::string video_id = name.substr(0, name.size() - 5);
    if (stage_status(stage, video_id) == StageStatus::Done) done.push_back(video_id);
  }
  return done;
}

CorpusManifest Pipeline::work_manifest() const {
  std::string path = dir("manifest.tsv");
  if (!file_exists(path))
    raise(Errc::Precondition, "no manifest in work dir; run `ingest` first");
  return parse_manifest(read_file(path), "", /*check_files=*/false);
}

Pipeline::Runtime& Pipeline::runtime() {
  if (runtime_) return *runtime_;
  auto rt = std::make_shared<Runtime>();
  rt->templates = PromptTemplates::load(cfg_.resolved_prompts_dir());
  rt->prep = load_prep_context(cfg_.resolved_stopword_path(), cfg_.resolved_lemma_path());

  std::unique_ptr<LlmBackend> backend;
  if (cfg_.backend == "mock") {
    backend = std::make_unique<MockBackend>(rt->templates, cfg_.mock_markers);
    if (cfg_.mock_fail_after > 0)
      backend = std::make_unique<FailAfterBackend>(std::move(backend), cfg_.mock_fail_after);
  } else {
    backend = std::make_unique<RemoteBackend>(cfg_.remote_config());
  }
  if (decorator_) backend = decorator_(std::move(backend));
  rt->backend = std::move(backend);

  rt->cache = std::make_unique<ResponseCache>(
      (fs::path(cfg_.resolved_cache_dir()) / "chat").string());
  rt->gateway = std::make_unique<Gateway>(*rt->backend, rt->cache.get(), cfg_.retry_policy(),
                                          cfg_.rate_limit());

  if (cfg_.backend == "mock") {
    rt->provider = std::make_unique<HashEmbedder>(cfg_.hash_dim, cfg_.hash_seed);
  } else {
    RemoteEmbedderConfig ec;
    ec.remote = cfg_.remote_config();
    ec.model_id = cfg_.embed_model_id;
    rt->provider = std::make_unique<RemoteEmbedder>(
        ec, (fs::path(cfg_.resolved_cache_dir()) / "embeddings").string());
  }
  runtime_ = std::move(rt);
  return *runtime_;
}

const GatewayStats* Pipeline::gateway_stats() const {
  return runtime_ ? &runtime_->gateway->stats() : nullptr;
}

std::vector<std::string> Pipeline::stage_inputs(const std::string& prior_stage,
                                                const std::string& this_stage,
                                                const StageOptions& opts) const {
  std::vector<std::string> ready = videos_done(prior_stage);
  if (ready.empty())
    raise(Errc::Precondition,
          "stage `" + this_stage + "` needs `" + prior_stage + "` to run first");
  if (!opts.video_id.empty()) {
    bool found = std::find(ready.begin(), ready.end(), opts.video_id) != ready.end();
    if (!found)
      raise(Errc::Precondition,
            "video " + opts.video_id + " has not completed stage `" + prior_stage + "`");
    ready = {opts.video_id};
  }
  if (opts.resume) {
    std::vector<std::string> pending;
    for (const auto& v : ready)
      if (stage_status(this_stage, v) != StageStatus::Done) pending.push_back(v);
    ready = pending;
  }
  return ready;
}

// ---- ingest ----

int Pipeline::ingest(const std::string& manifest_path, const StageOptions& opts) {
  cfg_.validate();
  if (!file_exists(manifest_path)) raise(Errc::MissingFile, manifest_path);
  CorpusManifest manifest = load_manifest(manifest_path);
  ensure_dir(dir("transcripts"));
  atomic_write_file(dir("manifest.tsv"), serialize_manifest(manifest));

  int failures = 0;
  for (const auto& rec : manifest.records) {
    if (!opts.video_id.empty() && rec.video_id != opts.video_id) continue;
    if (opts.resume && stage_status("ingest", rec.video_id) == StageStatus::Done) continue;
    try {
      std::string content = read_file(rec.path);
      std::vector<std::string> warnings;
      std::vector<CaptionEntry> entries;
      if (rec.format == "json") entries = parse_caption_json(content);
      else if (rec.format == "srt") entries = parse_srt(content, &warnings);
      else entries = parse_vtt(content, &warnings);
      for (const auto& w : warnings) logging::warn(rec.video_id + ": " + w);
      atomic_write_file((fs::path(dir("transcripts")) / (rec.video_id + ".json")).string(),
                        serialize_caption_json(entries));
      mark("ingest", rec.video_id, StageStatus::Done);
    } catch (const Error& e) {
      logging::error(rec.video_id + ": ingest failed: " + e.what());
      mark("ingest", rec.video_id, StageStatus::Failed, e.what());
      ++failures;
    }
  }
  std::cout << render_manifest_summary(manifest);
  return failures ? kExitPartialFailure : kExitOk;
}

// ---- detect ----

namespace {

Transcript load_work_transcript(const std::string& transcripts_dir, const ManifestRecord& rec) {
  Transcript t;
  t.video_id = rec.video_id;
  t.channel = rec.channel;
  t.kind = rec.kind;
  t.entries =
      parse_caption_json(read_file((fs::path(transcripts_dir) / (rec.video_id + ".json")).string()));
  return t;
}

}  // namespace

void Pipeline::rebuild_detections_jsonl() {
  std::string out;
  for (const auto& video_id : videos_done("detect")) {
    std::string path = (fs::path(dir("detections")) / (video_id + ".json")).string();
    if (!file_exists(path)) continue;
    DetectionResult result = detection_from_json(read_file(path));
    json line = json::parse(detection_to_json(result));
    out += line.dump() + "\n";
  }
  atomic_write_file(dir("detections.jsonl"), out);
}

int Pipeline::detect(const StageOptions& opts) {
  cfg_.validate();
  CorpusManifest manifest = work_manifest();
  std::vector<std::string> video_ids = stage_inputs("ingest", "detect", opts);
  Runtime& rt = runtime();
  ensure_dir(dir("detections"));
  PrepProfile profile = profile_from_name(cfg_.detect_profile);

  auto failures = run_pool(cfg_.parallelism, video_ids, [&](const std::string& video_id) {
    const ManifestRecord* rec = manifest.find(video_id);
    if (!rec) raise(Errc::UnknownVideoId, video_id);
    Transcript transcript = load_work_transcript(dir("transcripts"), *rec);
    if (profile == PrepProfile::FullPipeline) {
      for (auto& entry : transcript.entries) {
        std::string text = join(preprocess(entry.text, profile, rt.prep).tokens, " ");
        entry.text = text.empty() ? "-" : text;
      }
    }
    DetectionResult result = detect_ads(transcript, *rt.gateway, rt.templates, cfg_.detection);
    atomic_write_file((fs::path(dir("detections")) / (video_id + ".json")).string(),
                      detection_to_json(result));
    mark("detect", video_id, StageStatus::Done);
  });

  for (const auto& [video_id, reason] : failures) {
    logging::error(video_id + ": detect failed: " + reason);
    mark("detect", video_id, StageStatus::Failed, reason);
  }
  rebuild_detections_jsonl();
  return failures.empty() ? kExitOk : kExitPartialFailure;
}

// ---- keywords ----

int Pipeline::keywords(const StageOptions& opts) {
  cfg_.validate();
  if (profile_from_name(cfg_.keywords_profile) != PrepProfile::FullPipeline)
    logging::warn("keyword extraction always uses the full profile (stopword-free phrases)");
  CorpusManifest manifest = work_manifest();
  std::vector<std::string> video_ids = stage_inputs("detect", "keywords", opts);
  Runtime& rt = runtime();
  ensure_dir(dir("keywords"));

  auto failures = run_pool(cfg_.parallelism, video_ids, [&](const std::string& video_id) {
    const ManifestRecord* rec = manifest.find(video_id);
    if (!rec) raise(Errc::UnknownVideoId, video_id);
    Transcript transcript = load_work_transcript(dir("transcripts"), *rec);
    DetectionResult detection = detection_from_json(
        read_file((fs::path(dir("detections")) / (video_id + ".json")).string()));

    std::vector<std::string> ad_texts, content_texts;
    for (const auto& entry : transcript.entries) {
      bool in_ad = false;
      for (const auto& span : detection.spans) {
        if (span.validation == SpanValidation::Rejected) continue;
        if (entry.start < span.end && entry.end() > span.start) in_ad = true;
      }
      (in_ad ? ad_texts : content_texts).push_back(entry.text);
    }

    std::vector<KeywordRow> rows;
    auto extract_side = [&](const std::vector<std::string>& texts, const std::string& section) {
      if (texts.empty()) return;
      try {
        auto scored = extract_keywords(join(texts, " "), cfg_.extraction, *rt.provider, rt.prep);
        for (const auto& kw : scored) rows.push_back({video_id, section, kw.phrase, kw.score});
      } catch (const Error& e) {
        if (e.code() != Errc::EmptyAfterPreprocess) throw;
        logging::warn(video_id + ": no " + section + " keywords (" + e.what() + ")");
      }
    };
    extract_side(content_texts, "content");
    if (detection.has_ad) extract_side(ad_texts, "ad");

    atomic_write_file((fs::path(dir("keywords")) / (video_id + ".csv")).string(),
                      keywords_to_csv(rows));
    mark("keywords", video_id, StageStatus::Done);
  });

  for (const auto& [video_id, reason] : failures) {
    logging::error(video_id + ": keywords failed: " + reason);
    mark("keywords", video_id, StageStatus::Failed, reason);
  }
  return failures.empty() ? kExitOk : kExitPartialFailure;
}

// ---- group ----

namespace {

struct KeywordSides {
  std::vector<std::string> content;  // deduped, first-occurrence order
  std::vector<std::string> ad;
  std::map<std::string, std::vector<ScoredKeyword>> content_by_video;
  std::map<std::string, std::vector<ScoredKeyword>> ad_by_video;
  size_t row_count = 0;
};

KeywordSides gather_keywords(const std::string& keywords_dir,
                             const std::vector<std::string>& video_ids) {
  KeywordSides sides;
  std::set<std::string> seen_content, seen_ad;
  for (const auto& video_id : video_ids) {
    std::string path = (fs::path(keywords_dir) / (video_id + ".csv")).string();
    if (!file_exists(path)) continue;
    for (const auto& row : keywords_from_csv(read_file(path))) {
      ++sides.row_count;
      if (row.section == "ad") {
        sides.ad_by_video[row.video_id].push_back({row.phrase, row.score});
        if (seen_ad.insert(row.phrase).second) sides.ad.push_back(row.phrase);
      } else {
        sides.content_by_video[row.video_id].push_back({row.phrase, row.score});
        if (seen_content.insert(row.phrase).second) sides.content.push_back(row.phrase);
      }
    }
  }
  return sides;
}

std::vector<std::string> final_categories(const std::vector<std::string>& input,
                                          const std::vector<GroupingRound>& rounds) {
  return rounds.empty() ? input : rounds.back().output_groups;
}

}  // namespace

int Pipeline::group(const StageOptions& opts) {
  cfg_.validate();
  if (opts.resume && stage_status("group", kCorpusToken) == StageStatus::Done) return kExitOk;
  std::vector<std::string> video_ids = stage_inputs("keywords", "group", StageOptions{});
  Runtime& rt = runtime();
  ensure_dir(dir("groups"));

  KeywordSides sides = gather_keywords(dir("keywords"), video_ids);
  GroupingConfig gcfg{cfg_.grouping_batch_size, cfg_.grouping_max_rounds,
                      PromptBudget{cfg_.detection.prompt_budget_chars}};

  auto run_side = [&](const std::vector<std::string>& keywords, int target,
                      const std::string& stage_name) {
    std::vector<GroupingRound> rounds;
    std::vector<std::string> categories;
    if (!keywords.empty()) {
      rounds = group_cascade(keywords, *rt.gateway, rt.templates, target, gcfg);
      for (const auto& round : rounds)
        for (const auto& w : round.warnings)
          logging::warn(stage_name + " round " + std::to_string(round.round_index) + ": " + w);
      categories = final_categories(keywords, rounds);
    }
    atomic_write_file((fs::path(dir("groups")) / (stage_name + "_audit.jsonl")).string(),
                      audit_log_to_jsonl(stage_name, rounds));
    atomic_write_file((fs::path(dir("groups")) / (stage_name + "_categories.txt")).string(),
                      categories.empty() ? "" : join(categories, "\n") + "\n");
    KeywordCategoryMap map;
    if (!keywords.empty() && !categories.empty())
      map = assign_keywords(keywords, categories, *rt.provider);
    atomic_write_file((fs::path(dir("groups")) / (stage_name + "_assignments.csv")).string(),
                      category_map_to_csv(map));
  };

  run_side(sides.content, cfg_.content_target, "content");
  run_side(sides.ad, cfg_.ad_target, "ad");
  mark("group", kCorpusToken, StageStatus::Done);
  return kExitOk;
}

// ---- analyze / report ----

namespace {

std::vector<std::string> read_category_order(const std::string& path) {
  std::vector<std::string> categories;
  if (!file_exists(path)) return categories;
  for (const auto& line : split_lines(read_file(path))) {
    std::string t = trim(line);
    if (!t.empty()) categories.push_back(t);
  }
  return categories;
}

}  // namespace

std::string Pipeline::build_run_summary(const ReportBundle& bundle,
                                        const std::vector<std::string>& files) const {
  nlohmann::ordered_json doc;
  doc["tool"] = "sponsorscan";
  doc["backend"] = cfg_.backend;
  doc["model_id"] = cfg_.model_id;
  doc["embed_model_id"] = cfg_.embed_model_id;
  doc["config_digest"] = cfg_.digest();

  nlohmann::ordered_json counts;
  counts["manifest_records"] = work_manifest().records.size();
  counts["ingested"] = videos_done("ingest").size();
  counts["detected"] = videos_done("detect").size();
  int has_ad = 0;
  for (const auto& video_id : videos_done("detect")) {
    std::string path = (fs::path(cfg_.work_dir) / "detections" / (video_id + ".json")).string();
    if (file_exists(path) && detection_from_json(read_file(path)).has_ad) ++has_ad;
  }
  counts["videos_with_ads"] = has_ad;
  counts["keyword_videos"] = videos_done("keywords").size();
  counts["content_categories"] =
      read_category_order((fs::path(cfg_.work_dir) / "groups" / "content_categories.txt").string())
          .size();
  counts["ad_categories"] =
      read_category_order((fs::path(cfg_.work_dir) / "groups" / "ad_categories.txt").string())
          .size();
  counts["crosstab_videos"] = bundle.crosstab.total;
  counts["alignment_rows"] = bundle.alignment.size();
  doc["counts"] = counts;
  doc["reports"] = files;
  doc["config_toml"] = cfg_.to_toml();
  return doc.dump(2) + "\n";
}

int Pipeline::analyze_impl(const StageOptions& opts, bool mark_state) {
  cfg_.validate();
  if (mark_state && opts.resume && stage_status("analyze", kCorpusToken) == StageStatus::Done)
    return kExitOk;
  if (stage_status("group", kCorpusToken) != StageStatus::Done)
    raise(Errc::Precondition, "stage `analyze` needs `group` to run first");
  CorpusManifest manifest = work_manifest();
  Runtime& rt = runtime();

  std::vector<DetectionResult> detections;
  for (const auto& video_id : videos_done("detect"))
    detections.push_back(detection_from_json(
        read_file((fs::path(dir("detections")) / (video_id + ".json")).string())));

  KeywordSides sides = gather_keywords(dir("keywords"), videos_done("keywords"));
  KeywordCategoryMap content_map = category_map_from_csv(
      read_file((fs::path(dir("groups")) / "content_assignments.csv").string()));
  KeywordCategoryMap ad_map = category_map_from_csv(
      read_file((fs::path(dir("groups")) / "ad_assignments.csv").string()));
  std::vector<std::string> content_order =
      read_category_order((fs::path(dir("groups")) / "content_categories.txt").string());
  std::vector<std::string> ad_order =
      read_category_order((fs::path(dir("groups")) / "ad_categories.txt").string());

  CategoryAssignment assignment = assign_video_categories(
      sides.content_by_video, sides.ad_by_video, content_map, ad_map, content_order, ad_order);
  for (const auto& video_id : assignment.videos_without_keywords)
    logging::warn(video_id + ": no categorizable keywords; excluded from cross-tab");

  ReportBundle bundle;
  bundle.prevalence = prevalence_table(detections, manifest);
  bundle.crosstab = cross_tab(assignment, detections);

  for (const auto& det : detections) {
    if (!det.has_ad) continue;
    auto content_it = sides.content_by_video.find(det.video_id);
    auto ad_it = sides.ad_by_video.find(det.video_id);
    if (content_it == sides.content_by_video.end() || ad_it == sides.ad_by_video.end()) continue;
    if (content_it->second.empty() || ad_it->second.empty()) continue;

    std::vector<std::string> content_phrases, ad_phrases;
    for (const auto& kw : content_it->second) content_phrases.push_back(kw.phrase);
    for (const auto& kw : ad_it->second) ad_phrases.push_back(kw.phrase);
    AlignmentRow row;
    row.video_id = det.video_id;
    auto cc = assignment.video_content_category.find(det.video_id);
    auto ac = assignment.video_ad_category.find(det.video_id);
    row.content_category = cc == assignment.video_content_category.end() ? "(none)" : cc->second;
    row.ad_category = ac == assignment.video_ad_category.end() ? "(none)" : ac->second;
    row.score = alignment_score(ad_phrases, rt.provider->embed_batch(ad_phrases),
                                content_phrases, rt.provider->embed_batch(content_phrases));
    bundle.alignment.push_back(std::move(row));
  }

  std::vector<std::string> files = emit_reports(bundle, dir("reports"));
  atomic_write_file((fs::path(dir("reports")) / "run_summary.json").string(),
                    build_run_summary(bundle, files));
  if (mark_state) mark("analyze", kCorpusToken, StageStatus::Done);
  return kExitOk;
}

int Pipeline::analyze(const StageOptions& opts) { return analyze_impl(opts, true); }

// ---- eval ----

int Pipeline::eval_impl(const StageOptions& opts, bool mark_state) {
  cfg_.validate();
  if (mark_state && opts.resume && stage_status("eval", kCorpusToken) == StageStatus::Done)
    return kExitOk;
  if (cfg_.gold_path.empty())
    raise(Errc::Precondition, "stage `eval` needs gold labels (set gold_path)");
  if (!file_exists(cfg_.gold_path)) raise(Errc::MissingFile, cfg_.gold_path);
  std::vector<std::string> detected = stage_inputs("detect", "eval", StageOptions{});
  CorpusManifest manifest = work_manifest();

  std::vector<GoldSpans> gold = load_gold_spans(cfg_.gold_path);
  std::vector<EvalRow> rows;
  double overlap_total = 0, pred_total = 0, gold_total = 0;
  long seg_matches = 0, seg_pred = 0, seg_gold = 0;

  for (const auto& g : gold) {
    if (std::find(detected.begin(), detected.end(), g.video_id) == detected.end()) continue;
    const ManifestRecord* rec = manifest.find(g.video_id);
    if (!rec) raise(Errc::UnknownVideoId, g.video_id);
    Transcript transcript = load_work_transcript(dir("transcripts"), *rec);
    DetectionResult det = detection_from_json(
        read_file((fs::path(dir("detections")) / (g.video_id + ".json")).string()));

    std::vector<Interval> predicted;
    for (const auto& span : det.spans)
      if (span.validation != SpanValidation::Rejected)
        predicted.push_back({span.start, span.end});
    double duration = std::max(transcript.total_duration(), 1e-9);

    EvalRow row;
    row.video_id = g.video_id;
    row.time_level = time_level_metrics(predicted, g.spans, duration);
    row.segment_level = segment_level_metrics(predicted, g.spans, cfg_.iou_threshold);
    rows.push_back(row);

    // micro aggregation
    std::vector<Interval> p = predicted, gg = g.spans;
    double ov = 0;
    {
      // reuse the pairwise overlap through the metric outputs
      double p_len = 0, g_len = 0;
      for (const auto& s : p) p_len += s.end - s.start;
      for (const auto& s : gg) g_len += s.end - s.start;
      ov = row.time_level.recall * g_len;  // overlap = recall * |G| when G non-empty
      if (gg.empty()) ov = 0;
      overlap_total += ov;
      pred_total += p_len;
      gold_total += g_len;
    }
    seg_matches += static_cast<long>(
        std::llround(row.segment_level.precision * static_cast<double>(predicted.size())));
    seg_pred += static_cast<long>(predicted.size());
    seg_gold += static_cast<long>(g.spans.size());
  }

  EvalRow micro;
  micro.video_id = "(micro)";
  micro.time_level.level = MetricLevel::TimeLevel;
  micro.time_level.precision = pred_total > 0 ? overlap_total / pred_total : 1.0;
  micro.time_level.recall = gold_total > 0 ? overlap_total / gold_total : 1.0;
  micro.time_level.f1 =
      micro.time_level.precision + micro.time_level.recall > 0
          ? 2 * micro.time_level.precision * micro.time_level.recall /
                (micro.time_level.precision + micro.time_level.recall)
          : 0.0;
  micro.segment_level.level = MetricLevel::SegmentLevel;
  micro.segment_level.iou_threshold = cfg_.iou_threshold;
  micro.segment_level.precision =
      seg_pred > 0 ? static_cast<double>(seg_matches) / static_cast<double>(seg_pred) : 1.0;
  micro.segment_level.recall =
      seg_gold > 0 ? static_cast<double>(seg_matches) / static_cast<double>(seg_gold) : 1.0;
  micro.segment_level.f1 =
      micro.segment_level.precision + micro.segment_level.recall > 0
          ? 2 * micro.segment_level.precision * micro.segment_level.recall /
                (micro.segment_level.precision + micro.segment_level.recall)
          : 0.0;
  rows.push_back(micro);

  ensure_dir(dir("reports"));
  atomic_write_file((fs::path(dir("reports")) / "eval.csv").string(), render_eval_csv(rows));
  atomic_write_file((fs::path(dir("reports")) / "eval.md").string(), render_eval_markdown(rows));
  if (mark_state) mark("eval", kCorpusToken, StageStatus::Done);
  return kExitOk;
}

int Pipeline::eval(const StageOptions& opts) { return eval_impl(opts, true); }

// ---- run / report ----

int Pipeline::run(const std::string& manifest_path, const StageOptions& opts) {
  int worst = kExitOk;
  worst = std::max(worst, ingest(manifest_path, opts));
  worst = std::max(worst, detect(opts));
  worst = std::max(worst, keywords(opts));
  worst = std::max(worst, group(opts));
  worst = std::max(worst, analyze(opts));
  if (!cfg_.gold_path.empty()) worst = std::max(worst, eval(opts));
  return worst;
}

int Pipeline::report(const StageOptions& opts) {
  int code = analyze_impl(opts, /*mark_state=*/false);
  if (!cfg_.gold_path.empty()) code = std::max(code, eval_impl(opts, /*mark_state=*/false));
  return code;
}

}  // namespace sponsorscan
