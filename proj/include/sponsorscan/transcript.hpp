#pragma once

#include <string>
#include <vector>

namespace sponsorscan {

/// One timed caption unit. Text is stored verbatim; cleaning happens downstream.
struct CaptionEntry {
  std::string text;
  double start = 0.0;     // seconds from video start
  double duration = 0.0;  // seconds

  double end() const { return start + duration; }
};

enum class TranscriptKind { Generated, Manual };

const char* kind_name(TranscriptKind kind);
TranscriptKind kind_from_name(const std::string& name);  // "generated" | "manual"

struct Transcript {
  std::string video_id;
  std::string channel;
  TranscriptKind kind = TranscriptKind::Generated;
  std::vector<CaptionEntry> entries;  // sorted by start, non-decreasing

  double total_duration() const;  // max over entries of start + duration
};

// Caption JSON: UTF-8 array of {"text": string, "start": number, "duration": number}.
// Entries come back stably sorted by start.
std::vector<CaptionEntry> parse_caption_json(const std::string& bytes);
// Writes times with at most 3 fractional digits; parse(serialize(t)) reproduces
// entries exactly for millisecond-quantized times.
std::string serialize_caption_json(const std::vector<CaptionEntry>& entries);

// SubRip: blocks of index / "HH:MM:SS,mmm --> HH:MM:SS,mmm" / text lines.
// Multi-line cue text is joined with single spaces. Overlapping cues are kept
// and reported through `warnings`.
std::vector<CaptionEntry> parse_srt(const std::string& text,
                                    std::vector<std::string>* warnings = nullptr);
std::string serialize_srt(const std::vector<CaptionEntry>& entries);

// WebVTT: requires the WEBVTT header; hours optional in timestamps; NOTE/STYLE
// blocks and cue settings are discarded.
std::vector<CaptionEntry> parse_vtt(const std::string& text,
                                    std::vector<std::string>* warnings = nullptr);
std::string serialize_vtt(const std::vector<CaptionEntry>& entries);

}  // namespace sponsorscan
