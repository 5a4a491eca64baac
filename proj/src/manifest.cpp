#include "sponsorscan/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/util.hpp"

namespace fs = std::filesystem;

namespace sponsorscan {

const ManifestRecord* CorpusManifest::find(const std::string& video_id) const {
  for (const auto& r : records)
    if (r.video_id == video_id) return &r;
  return nullptr;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  char sep = line.find('\t') != std::string::npos ? '\t' : ',';
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

}  // namespace

CorpusManifest parse_manifest(const std::string& text, const std::string& base_dir,
                              bool check_files) {
  CorpusManifest manifest;
  std::set<std::string> seen_ids;
  int lineno = 0;
  for (const auto& raw : split_lines(text)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line);
    if (fields.size() != 5)
      raise(Errc::MalformedInput,
            "manifest line " + std::to_string(lineno) + ": expected 5 fields, got " +
                std::to_string(fields.size()));
    ManifestRecord rec;
    rec.video_id = fields[0];
    rec.channel = fields[1];
    rec.kind = kind_from_name(fields[2]);
    rec.format = to_lower(fields[3]);
    rec.path = fields[4];
    if (rec.video_id.empty())
      raise(Errc::MalformedInput, "manifest line " + std::to_string(lineno) + ": empty video_id");
    for (char c : rec.video_id)  // ids become file names downstream
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
        raise(Errc::MalformedInput,
              "manifest line " + std::to_string(lineno) + ": video_id not filesystem-safe");
    if (rec.format != "json" && rec.format != "srt" && rec.format != "vtt")
      raise(Errc::UnknownFormatTag, "line " + std::to_string(lineno) + ": " + fields[3]);
    if (!seen_ids.insert(rec.video_id).second)
      raise(Errc::DuplicateVideoId, rec.video_id);
    if (!base_dir.empty() && fs::path(rec.path).is_relative())
      rec.path = (fs::path(base_dir) / rec.path).string();
    if (check_files) {
      std::ifstream probe(rec.path);
      if (!probe) raise(Errc::MissingFile, rec.path);
    }
    manifest.records.push_back(std::move(rec));
  }
  return manifest;
}

CorpusManifest load_manifest(const std::string& path) {
  std::string base = fs::path(path).parent_path().string();
  return parse_manifest(read_file(path), base, /*check_files=*/true);
}

std::string serialize_manifest(const CorpusManifest& manifest) {
  std::string out = "# video_id\tchannel\tkind\tformat\tpath\n";
  for (const auto& r : manifest.records) {
    out += r.video_id + "\t" + r.channel + "\t" + kind_name(r.kind) + "\t" + r.format + "\t" +
           r.path + "\n";
  }
  return out;
}

std::map<std::string, KindCounts> manifest_summary(const CorpusManifest& manifest) {
  std::map<std::string, KindCounts> summary;
  for (const auto& r : manifest.records) {
    auto& counts = summary[r.channel];
    if (r.kind == TranscriptKind::Generated) ++counts.generated;
    else ++counts.manual;
  }
  return summary;
}

std::string render_manifest_summary(const CorpusManifest& manifest) {
  auto summary = manifest_summary(manifest);
  size_t width = 7;  // "Channel"
  for (const auto& [channel, _] : summary) width = std::max(width, channel.size());
  std::ostringstream out;
  out << "Channel";
  out << std::string(width - 7, ' ') << "  Generated  Manual\n";
  KindCounts total;
  for (const auto& [channel, counts] : summary) {
    out << channel << std::string(width - channel.size(), ' ');
    char buf[48];
    std::snprintf(buf, sizeof(buf), "  %9d  %6d\n", counts.generated, counts.manual);
    out << buf;
    total.generated += counts.generated;
    total.manual += counts.manual;
  }
  out << "Total" << std::string(width - 5, ' ');
  char buf[48];
  std::snprintf(buf, sizeof(buf), "  %9d  %6d\n", total.generated, total.manual);
  out << buf;
  return out.str();
}

}  // namespace sponsorscan
