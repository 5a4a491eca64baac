#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sponsorscan/config.hpp"
#include "sponsorscan/manifest.hpp"
#include "sponsorscan/transcript.hpp"
#include "sponsorscan/util.hpp"

namespace sponsorscan::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = (std::filesystem::temp_directory_path() /
             ("sponsorscan_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter.fetch_add(1))))
                .string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

inline const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> words = {
      "quantum",  "field",   "theory",  "galaxy",  "orbit",   "neuron",   "protein",
      "bridge",   "arch",    "design",  "economy", "market",  "history",  "empire",
      "signal",   "circuit", "planet",  "fossil",  "climate", "energy",   "particle",
      "lecture",  "tutor",   "matrix",  "vector",  "geometry", "algebra", "habitat",
      "volcano",  "glacier", "railway", "compass"};
  return words;
}

inline std::string random_sentence(std::mt19937& rng, int words) {
  const auto& pool = word_pool();
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += pool[pick(rng)];
  }
  return out;
}

// Contiguous entries (each starts where the previous ended).
inline std::vector<CaptionEntry> make_entries(std::mt19937& rng, int count,
                                              double entry_seconds = 4.0) {
  std::vector<CaptionEntry> entries;
  double t = 0;
  std::uniform_int_distribution<int> words(3, 8);
  for (int i = 0; i < count; ++i) {
    entries.push_back({random_sentence(rng, words(rng)), t, entry_seconds});
    t += entry_seconds;
  }
  return entries;
}

struct PlantedAd {
  double start = 0;
  double end = 0;
};

// Replaces entries [first, first+len) with marker-bearing ad text.
inline PlantedAd plant_ad(std::vector<CaptionEntry>& entries, int first, int len,
                          const std::string& marker = "sponsored by") {
  for (int i = first; i < first + len; ++i) {
    entries[static_cast<size_t>(i)].text =
        "this part is " + marker + " acme tools episode " + std::to_string(i);
  }
  return {entries[static_cast<size_t>(first)].start,
          entries[static_cast<size_t>(first + len - 1)].end()};
}

struct ChannelSpec {
  std::string channel;
  int generated = 0;
  int manual = 0;
  int detected_generated = 0;
  int detected_manual = 0;
};

// Reference corpus: per-channel transcript counts and expected detections.
inline std::vector<ChannelSpec> reference_channels() {
  return {
      {"3Blue1Brown", 9, 49, 0, 3},   {"DamiLee", 48, 9, 14, 7},
      {"Fireship", 47, 0, 10, 0},     {"Johnny Harris", 48, 44, 42, 41},
      {"PBS Space Time", 44, 48, 20, 27}, {"SciShow", 47, 28, 23, 23},
  };
}

struct BuiltCorpus {
  std::string manifest_path;
  CorpusManifest manifest;
  std::vector<PlantedAd> planted;            // aligned with planted_ids
  std::vector<std::string> planted_ids;
  std::vector<std::string> all_ids;
};

// Writes caption-JSON transcripts plus a manifest. Videos named
// <channel-slug>_<kind>_<n>; the first `detected` per (channel, kind) carry a
// planted marker run.
inline BuiltCorpus build_corpus(const std::string& dir, const std::vector<ChannelSpec>& specs,
                                int entries_per_video = 10, int ad_first = 4, int ad_len = 3) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ad_len = std::min(ad_len, entries_per_video);
  ad_first = std::max(0, std::min(ad_first, entries_per_video - ad_len));
  BuiltCorpus corpus;
  std::mt19937 rng(12345);
  std::string manifest_text = "# video_id, channel, kind, format, path\n";

  auto slug = [](std::string s) {
    for (char& c : s)
      if (c == ' ') c = '-';
    return to_lower(s);
  };

  for (const auto& spec : specs) {
    struct Side {
      TranscriptKind kind;
      int total;
      int detected;
    };
    for (const Side& side : {Side{TranscriptKind::Generated, spec.generated,
                                  spec.detected_generated},
                             Side{TranscriptKind::Manual, spec.manual, spec.detected_manual}}) {
      for (int n = 0; n < side.total; ++n) {
        std::string video_id =
            slug(spec.channel) + "_" + kind_name(side.kind) + "_" + std::to_string(n);
        auto entries = make_entries(rng, entries_per_video);
        if (n < side.detected) {
          PlantedAd ad = plant_ad(entries, ad_first, ad_len);
          corpus.planted.push_back(ad);
          corpus.planted_ids.push_back(video_id);
        }
        std::string file = (fs::path(dir) / (video_id + ".json")).string();
        write_file(file, serialize_caption_json(entries));
        manifest_text += video_id + "\t" + spec.channel + "\t" + kind_name(side.kind) +
                         "\tjson\t" + file + "\n";
        corpus.all_ids.push_back(video_id);
      }
    }
  }
  corpus.manifest_path = (fs::path(dir) / "manifest.tsv").string();
  write_file(corpus.manifest_path, manifest_text);
  corpus.manifest = load_manifest(corpus.manifest_path);
  return corpus;
}

// Mock-friendly offline config rooted in a work directory.
inline RunConfig mock_config(const std::string& work_dir) {
  RunConfig cfg;
  cfg.backend = "mock";
  cfg.work_dir = work_dir;
  cfg.retry_base_ms = 0;
  cfg.parallelism = 2;
  return cfg;
}

}  // namespace sponsorscan::testing
