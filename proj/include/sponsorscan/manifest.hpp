#pragma once

#include <map>
#include <string>
#include <vector>

#include "sponsorscan/transcript.hpp"

namespace sponsorscan {

struct ManifestRecord {
  std::string video_id;
  std::string channel;
  TranscriptKind kind = TranscriptKind::Generated;
  std::string format;  // json | srt | vtt
  std::string path;
};

struct CorpusManifest {
  std::vector<ManifestRecord> records;

  const ManifestRecord* find(const std::string& video_id) const;
};

// One record per line, tab- or comma-separated:
//   video_id, channel, kind(generated|manual), format(json|srt|vtt), path
// '#' comment lines and blank lines are ignored. Relative paths resolve
// against the manifest's directory.
CorpusManifest load_manifest(const std::string& path);
CorpusManifest parse_manifest(const std::string& text, const std::string& base_dir,
                              bool check_files = true);
std::string serialize_manifest(const CorpusManifest& manifest);

struct KindCounts {
  int generated = 0;
  int manual = 0;
};

// channel -> per-kind transcript counts (sorted by channel)
std::map<std::string, KindCounts> manifest_summary(const CorpusManifest& manifest);
// dataset-summary text table: one channel per row plus a Total row
std::string render_manifest_summary(const CorpusManifest& manifest);

}  // namespace sponsorscan
