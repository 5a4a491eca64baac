#include "sponsorscan/transcript.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/manifest.hpp"
#include "sponsorscan/util.hpp"
#include "support/fixtures.hpp"

using namespace sponsorscan;

namespace {

bool entries_equal(const std::vector<CaptionEntry>& a, const std::vector<CaptionEntry>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].text != b[i].text) return false;
    if (a[i].start != b[i].start) return false;  // bit-exact after quantized write
    if (a[i].duration != b[i].duration) return false;
  }
  return true;
}

// millisecond-quantized random transcript, texts safe for all three formats
std::vector<CaptionEntry> random_transcript(std::mt19937& rng) {
  std::uniform_int_distribution<int> count(0, 14);
  std::uniform_int_distribution<int> gap_ms(0, 2500);
  std::uniform_int_distribution<int> dur_ms(200, 8000);
  std::uniform_int_distribution<int> words(1, 7);
  std::vector<CaptionEntry> entries;
  long t_ms = 0;
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    t_ms += gap_ms(rng);
    long d_ms = dur_ms(rng);
    entries.push_back({sponsorscan::testing::random_sentence(rng, words(rng)), t_ms / 1000.0,
                       d_ms / 1000.0});
    t_ms += d_ms;
  }
  return entries;
}

}  // namespace

TEST_CASE("caption json: forced examples") {
  auto one = parse_caption_json(R"([{"text":"hello","start":0.0,"duration":2.5}])");
  REQUIRE(one.size() == 1);
  CHECK(one[0].text == "hello");
  CHECK(one[0].start == 0.0);
  CHECK(one[0].duration == 2.5);

  CHECK(parse_caption_json("[]").empty());

  auto sorted = parse_caption_json(
      R"([{"text":"b","start":5.0,"duration":1.0},{"text":"a","start":1.0,"duration":1.0}])");
  REQUIRE(sorted.size() == 2);
  CHECK(sorted[0].text == "a");
  CHECK(sorted[0].start == 1.0);
  CHECK(sorted[1].text == "b");
}

TEST_CASE("caption json: errors") {
  CHECK_THROWS_AS(parse_caption_json("5"), Error);
  CHECK_THROWS_AS(parse_caption_json("not json"), Error);
  CHECK_THROWS_AS(parse_caption_json(R"([{"text":"a","start":0}])"), Error);
  CHECK_THROWS_AS(parse_caption_json(R"([{"text":"a","start":"x","duration":1}])"), Error);
  CHECK_THROWS_AS(parse_caption_json(R"([{"text":"  ","start":0,"duration":1}])"), Error);

  try {
    parse_caption_json(R"([{"text":"a","start":-1.0,"duration":1}])");
    FAIL("expected NegativeTime");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NegativeTime);
  }
}

TEST_CASE("caption json: serialize forced cases") {
  CHECK(serialize_caption_json({}) == "[]\n");
  auto text = serialize_caption_json({{"hi", 1.0, 2.5}});
  auto back = parse_caption_json(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0].start == 1.0);
  CHECK(back[0].duration == 2.5);
}

TEST_CASE("srt: hand-computed timestamp arithmetic") {
  auto entries = parse_srt("1\n00:00:01,000 --> 00:00:03,500\nhi there\n");
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].text == "hi there");
  CHECK(entries[0].start == doctest::Approx(1.0));
  CHECK(entries[0].duration == doctest::Approx(2.5));

  CHECK(parse_srt("").empty());
  CHECK(parse_srt("\n\n\n").empty());
}

TEST_CASE("srt: multi-line text joins with single spaces") {
  auto entries = parse_srt("1\n00:00:01,000 --> 00:00:02,000\nline one\nline two\n");
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].text == "line one line two");
}

TEST_CASE("srt: end before start raises MalformedTimestamp") {
  try {
    parse_srt("1\n00:00:05,000 --> 00:00:03,000\noops\n");
    FAIL("expected MalformedTimestamp");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedTimestamp);
  }
  CHECK_THROWS_AS(parse_srt("1\ngarbage --> 00:00:03,000\nx\n"), Error);
  CHECK_THROWS_AS(parse_srt("1\n00:00:99,000 --> 00:01:03,000\nx\n"), Error);
}

TEST_CASE("srt: overlapping cues kept and flagged") {
  std::vector<std::string> warnings;
  auto entries = parse_srt(
      "1\n00:00:01,000 --> 00:00:05,000\nfirst\n\n2\n00:00:04,000 --> 00:00:06,000\nsecond\n",
      &warnings);
  CHECK(entries.size() == 2);
  CHECK(warnings.size() == 1);
}

TEST_CASE("vtt: hand-computed example, hours optional") {
  auto entries = parse_vtt("WEBVTT\n\n00:01.000 --> 00:02.000\nyo\n");
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].text == "yo");
  CHECK(entries[0].start == doctest::Approx(1.0));
  CHECK(entries[0].duration == doctest::Approx(1.0));
}

TEST_CASE("vtt: missing header raises MissingHeader") {
  try {
    parse_vtt("00:01.000 --> 00:02.000\nyo\n");
    FAIL("expected MissingHeader");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingHeader);
  }
}

TEST_CASE("vtt: two-line cue text joins; NOTE and settings discarded") {
  auto entries = parse_vtt(
      "WEBVTT\n\nNOTE this is a comment\n\n00:00:01.000 --> 00:00:02.000 align:start\n"
      "first line\nsecond line\n\n");
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].text == "first line second line");
}

TEST_CASE("vtt: cue identifier lines are allowed") {
  auto entries = parse_vtt("WEBVTT\n\nintro-cue\n00:01.000 --> 00:02.500\nhello\n");
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].duration == doctest::Approx(1.5));
}

TEST_CASE("property: parse/serialize fixed point across 100 cases per format") {
  std::mt19937 rng(99);
  for (int it = 0; it < 100; ++it) {
    auto entries = random_transcript(rng);

    auto json_text = serialize_caption_json(entries);
    auto json_back = parse_caption_json(json_text);
    CHECK(entries_equal(json_back, entries));
    CHECK(serialize_caption_json(json_back) == json_text);

    auto srt_text = serialize_srt(entries);
    auto srt_back = parse_srt(srt_text);
    CHECK(entries_equal(srt_back, entries));
    CHECK(serialize_srt(srt_back) == srt_text);

    auto vtt_text = serialize_vtt(entries);
    auto vtt_back = parse_vtt(vtt_text);
    CHECK(entries_equal(vtt_back, entries));
    CHECK(serialize_vtt(vtt_back) == vtt_text);
  }
}

TEST_CASE("property: parsed entries are sorted and duration bounds hold") {
  std::mt19937 rng(7);
  for (int it = 0; it < 50; ++it) {
    auto entries = random_transcript(rng);
    std::shuffle(entries.begin(), entries.end(), rng);
    auto parsed = parse_caption_json(serialize_caption_json(entries));
    Transcript t{"x", "c", TranscriptKind::Generated, parsed};
    for (size_t i = 1; i < parsed.size(); ++i) CHECK(parsed[i - 1].start <= parsed[i].start);
    for (const auto& e : parsed) CHECK(t.total_duration() >= e.start);
  }
}

TEST_CASE("manifest: counts, duplicates, missing files, unknown tags") {
  sponsorscan::testing::TempDir tmp("manifest");
  write_file(tmp.file("a.json"), "[]");

  std::string good = "# comment\n"
                     "v1\tChan A\tgenerated\tjson\t" + tmp.file("a.json") + "\n"
                     "v2,Chan A,manual,json," + tmp.file("a.json") + "\n"
                     "v3\tChan B\tgenerated\tjson\t" + tmp.file("a.json") + "\n";
  write_file(tmp.file("m.tsv"), good);
  auto manifest = load_manifest(tmp.file("m.tsv"));
  CHECK(manifest.records.size() == 3);
  auto summary = manifest_summary(manifest);
  CHECK(summary["Chan A"].generated == 1);
  CHECK(summary["Chan A"].manual == 1);
  CHECK(summary["Chan B"].generated == 1);

  write_file(tmp.file("dup.tsv"),
             "v1\tC\tgenerated\tjson\t" + tmp.file("a.json") + "\n" +
             "v1\tC\tmanual\tjson\t" + tmp.file("a.json") + "\n");
  try {
    load_manifest(tmp.file("dup.tsv"));
    FAIL("expected DuplicateVideoId");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateVideoId);
  }

  write_file(tmp.file("missing.tsv"), "v1\tC\tgenerated\tjson\t" + tmp.file("nope.json") + "\n");
  try {
    load_manifest(tmp.file("missing.tsv"));
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingFile);
  }

  write_file(tmp.file("tag.tsv"), "v1\tC\tgenerated\tavi\t" + tmp.file("a.json") + "\n");
  try {
    load_manifest(tmp.file("tag.tsv"));
    FAIL("expected UnknownFormatTag");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownFormatTag);
  }

  CHECK(parse_manifest("", "", false).records.empty());
}

TEST_CASE("manifest: fixture reproduces the dataset-summary totals") {
  sponsorscan::testing::TempDir tmp("table1");
  auto corpus = sponsorscan::testing::build_corpus(tmp.path(),
                                                   sponsorscan::testing::reference_channels(), 4);
  auto summary = manifest_summary(corpus.manifest);
  int generated = 0, manual = 0;
  for (const auto& [channel, counts] : summary) {
    generated += counts.generated;
    manual += counts.manual;
  }
  CHECK(generated == 243);
  CHECK(manual == 178);
  CHECK(corpus.manifest.records.size() == 421);
  CHECK(summary["3Blue1Brown"].generated == 9);
  CHECK(summary["3Blue1Brown"].manual == 49);
  CHECK(summary["Fireship"].manual == 0);
  CHECK(summary["Johnny Harris"].generated == 48);
}
