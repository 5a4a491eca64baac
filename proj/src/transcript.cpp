#include "sponsorscan/transcript.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/util.hpp"

using nlohmann::json;

namespace sponsorscan {

const char* kind_name(TranscriptKind kind) {
  return kind == TranscriptKind::Generated ? "generated" : "manual";
}

TranscriptKind kind_from_name(const std::string& name) {
  std::string n = to_lower(trim(name));
  if (n == "generated") return TranscriptKind::Generated;
  if (n == "manual") return TranscriptKind::Manual;
  raise(Errc::MalformedInput, "unknown transcript kind: " + name);
}

double Transcript::total_duration() const {
  double total = 0.0;
  for (const auto& e : entries) total = std::max(total, e.end());
  return total;
}

namespace {

void validate_entry(CaptionEntry& entry) {
  if (!(entry.start >= 0.0) || !(entry.duration >= 0.0))
    raise(Errc::NegativeTime, "negative start or duration at t=" + format_seconds(entry.start));
  if (trim(entry.text).empty())
    raise(Errc::MalformedInput, "caption text empty at t=" + format_seconds(entry.start));
}

void sort_by_start(std::vector<CaptionEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const CaptionEntry& a, const CaptionEntry& b) { return a.start < b.start; });
}

}  // namespace

std::vector<CaptionEntry> parse_caption_json(const std::string& bytes) {
  json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded()) raise(Errc::MalformedInput, "caption file is not valid JSON");
  if (!doc.is_array()) raise(Errc::MalformedInput, "caption JSON must be an array");
  std::vector<CaptionEntry> entries;
  entries.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object()) raise(Errc::MalformedInput, "caption record is not an object");
    if (!item.contains("text") || !item.contains("start") || !item.contains("duration"))
      raise(Errc::MalformedInput, "caption record missing text/start/duration");
    if (!item["text"].is_string()) raise(Errc::MalformedInput, "caption text is not a string");
    if (!item["start"].is_number() || !item["duration"].is_number())
      raise(Errc::MalformedInput, "caption start/duration is not numeric");
    CaptionEntry entry{item["text"].get<std::string>(), item["start"].get<double>(),
                       item["duration"].get<double>()};
    validate_entry(entry);
    entries.push_back(std::move(entry));
  }
  sort_by_start(entries);
  return entries;
}

std::string serialize_caption_json(const std::vector<CaptionEntry>& entries) {
  // numbers are written by hand to pin the <= 3 fractional digit contract
  std::string out = "[";
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) out += ",";
    out += "\n  {\"text\": ";
    out += json(entries[i].text).dump();
    out += ", \"start\": " + format_seconds(entries[i].start);
    out += ", \"duration\": " + format_seconds(entries[i].duration) + "}";
  }
  out += entries.empty() ? "]" : "\n]";
  out += "\n";
  return out;
}

namespace {

// "HH:MM:SS,mmm" (SRT) or "[HH:]MM:SS.mmm" (VTT); both separators accepted.
// Returns integer milliseconds so second-values divide out bit-exactly.
long parse_timestamp(const std::string& token, bool hours_optional) {
  std::string t = trim(token);
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    size_t colon = t.find(':', pos);
    if (colon == std::string::npos) {
      parts.push_back(t.substr(pos));
      break;
    }
    parts.push_back(t.substr(pos, colon - pos));
    pos = colon + 1;
  }
  if (parts.size() == 2 && hours_optional) parts.insert(parts.begin(), "0");
  if (parts.size() != 3) raise(Errc::MalformedTimestamp, "bad timestamp: " + token);

  auto to_int = [&](const std::string& s) -> long {
    if (s.empty()) raise(Errc::MalformedTimestamp, "bad timestamp: " + token);
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        raise(Errc::MalformedTimestamp, "bad timestamp: " + token);
    return std::stol(s);
  };

  std::string secs = parts[2];
  long millis = 0;
  size_t sep = secs.find_first_of(",.");
  if (sep != std::string::npos) {
    std::string frac = secs.substr(sep + 1);
    secs = secs.substr(0, sep);
    if (frac.empty() || frac.size() > 3) raise(Errc::MalformedTimestamp, "bad timestamp: " + token);
    while (frac.size() < 3) frac += '0';
    millis = to_int(frac);
  }
  long h = to_int(parts[0]);
  long m = to_int(parts[1]);
  long s = to_int(secs);
  if (m >= 60 || s >= 60) raise(Errc::MalformedTimestamp, "bad timestamp: " + token);
  return ((h * 60 + m) * 60 + s) * 1000 + millis;
}

struct CueTimes {
  long start_ms = 0;
  long end_ms = 0;
  double start() const { return static_cast<double>(start_ms) / 1000.0; }
  double duration() const { return static_cast<double>(end_ms - start_ms) / 1000.0; }
};

// "<ts> --> <ts>[ settings...]"; trailing settings are discarded
CueTimes parse_cue_line(const std::string& line, bool hours_optional) {
  size_t arrow = line.find("-->");
  if (arrow == std::string::npos) raise(Errc::MalformedTimestamp, "missing --> in: " + line);
  std::string lhs = trim(line.substr(0, arrow));
  std::string rhs = trim(line.substr(arrow + 3));
  size_t ws = rhs.find_first_of(" \t");
  if (ws != std::string::npos) rhs = rhs.substr(0, ws);
  CueTimes times;
  times.start_ms = parse_timestamp(lhs, hours_optional);
  times.end_ms = parse_timestamp(rhs, hours_optional);
  if (times.end_ms < times.start_ms)
    raise(Errc::MalformedTimestamp, "cue ends before it starts: " + line);
  return times;
}

bool is_integer_line(const std::string& line) {
  std::string t = trim(line);
  if (t.empty()) return false;
  for (char c : t)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::vector<std::vector<std::string>> split_blocks(const std::string& text) {
  std::vector<std::vector<std::string>> blocks;
  std::vector<std::string> current;
  for (auto& line : split_lines(text)) {
    if (trim(line).empty()) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(line);
    }
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  return blocks;
}

void append_cue(std::vector<CaptionEntry>& entries, const CueTimes& times,
                const std::vector<std::string>& text_lines, std::vector<std::string>* warnings) {
  std::vector<std::string> trimmed;
  for (const auto& l : text_lines) {
    std::string t = trim(l);
    if (!t.empty()) trimmed.push_back(t);
  }
  std::string text = join(trimmed, " ");
  if (text.empty()) {
    if (warnings) warnings->push_back("dropped empty cue at " + format_seconds(times.start()));
    return;
  }
  if (warnings && !entries.empty()) {
    const CaptionEntry& prev = entries.back();
    if (times.start() < prev.end())
      warnings->push_back("overlapping cue at " + format_seconds(times.start()));
  }
  entries.push_back({text, times.start(), times.duration()});
}

std::string format_cue_timestamp(double seconds, char frac_sep) {
  long total_ms = std::llround(seconds * 1000.0);
  long ms = total_ms % 1000;
  long total_s = total_ms / 1000;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02ld:%02ld:%02ld%c%03ld", total_s / 3600,
                (total_s / 60) % 60, total_s % 60, frac_sep, ms);
  return std::string(buf);
}

}  // namespace

std::vector<CaptionEntry> parse_srt(const std::string& text, std::vector<std::string>* warnings) {
  std::vector<CaptionEntry> entries;
  for (const auto& block : split_blocks(text)) {
    size_t i = 0;
    if (i < block.size() && is_integer_line(block[i]) && block.size() > 1 &&
        block[i + 1].find("-->") != std::string::npos)
      ++i;
    if (i >= block.size()) continue;
    CueTimes times = parse_cue_line(block[i], /*hours_optional=*/false);
    append_cue(entries, times, {block.begin() + static_cast<long>(i) + 1, block.end()}, warnings);
  }
  sort_by_start(entries);
  return entries;
}

std::string serialize_srt(const std::vector<CaptionEntry>& entries) {
  std::string out;
  for (size_t i = 0; i < entries.size(); ++i) {
    out += std::to_string(i + 1) + "\n";
    out += format_cue_timestamp(entries[i].start, ',') + " --> " +
           format_cue_timestamp(entries[i].end(), ',') + "\n";
    out += entries[i].text + "\n\n";
  }
  return out;
}

std::vector<CaptionEntry> parse_vtt(const std::string& text, std::vector<std::string>* warnings) {
  std::string body = text;
  if (starts_with(body, "\xEF\xBB\xBF")) body = body.substr(3);
  auto lines = split_lines(body);
  if (lines.empty() || !starts_with(trim(lines[0]), "WEBVTT"))
    raise(Errc::MissingHeader, "document does not start with WEBVTT");

  // strip the header line, then parse cue blocks
  size_t header_end = body.find('\n');
  std::string rest = header_end == std::string::npos ? "" : body.substr(header_end + 1);

  std::vector<CaptionEntry> entries;
  for (const auto& block : split_blocks(rest)) {
    std::string first = trim(block[0]);
    if (starts_with(first, "NOTE") || starts_with(first, "STYLE") || starts_with(first, "REGION"))
      continue;
    // a cue may start with an identifier line before the timing line; blocks
    // without any timing line are metadata and get skipped
    size_t i = 0;
    while (i < block.size() && block[i].find("-->") == std::string::npos) ++i;
    if (i == block.size()) continue;
    CueTimes times = parse_cue_line(block[i], /*hours_optional=*/true);
    append_cue(entries, times, {block.begin() + static_cast<long>(i) + 1, block.end()}, warnings);
  }
  sort_by_start(entries);
  return entries;
}

std::string serialize_vtt(const std::vector<CaptionEntry>& entries) {
  std::string out = "WEBVTT\n\n";
  for (const auto& entry : entries) {
    out += format_cue_timestamp(entry.start, '.') + " --> " +
           format_cue_timestamp(entry.end(), '.') + "\n";
    out += entry.text + "\n\n";
  }
  return out;
}

}  // namespace sponsorscan
