#include "sponsorscan/reply_parse.hpp"

#include <doctest.h>

#include <random>

#include "sponsorscan/errors.hpp"
#include "support/fixtures.hpp"

using namespace sponsorscan;

TEST_CASE("record list: the prompt's own single-quoted shape") {
  auto reply = parse_llm_record_list(
      "[{'text': 'This video is sponsored by X', 'start': 12.0, 'duration': 4.5}]");
  CHECK_FALSE(reply.no_ad);
  REQUIRE(reply.records.size() == 1);
  CHECK(reply.records[0].text == "This video is sponsored by X");
  CHECK(reply.records[0].start == 12.0);
  CHECK(reply.records[0].duration == 4.5);
}

TEST_CASE("record list: None literal means no ad") {
  for (const char* content : {"None", "null", "NONE", "none", "None.", " None \n"}) {
    auto reply = parse_llm_record_list(content);
    CHECK(reply.no_ad);
    CHECK(reply.records.empty());
  }
}

TEST_CASE("record list: fences are stripped") {
  auto reply = parse_llm_record_list("```json\n[{\"text\":\"ad\",\"start\":1,\"duration\":2}]\n```");
  REQUIRE(reply.records.size() == 1);
  CHECK(reply.records[0].start == 1.0);

  auto fenced_none = parse_llm_record_list("```\nNone\n```");
  CHECK(fenced_none.no_ad);
}

TEST_CASE("record list: tri-state, no empty-record success") {
  // every content maps to exactly one of records / NoAd / Unparseable
  auto empty = parse_llm_record_list("[]");
  CHECK(empty.no_ad);
  CHECK(empty.records.empty());
  CHECK(empty.invalid.empty());

  auto some = parse_llm_record_list("[{'text':'x','start':1,'duration':1}]");
  CHECK_FALSE(some.no_ad);
  CHECK(some.records.size() + some.invalid.size() >= 1);

  CHECK_THROWS_AS(parse_llm_record_list("nothing to see"), Error);
}

TEST_CASE("record list: golden corpus of reply variants") {
  struct Variant {
    const char* content;
    int valid;
    int invalid;
  };
  const std::vector<Variant> records_cases = {
      // the single-quoted dict shape the ad prompt itself shows
      {"[{'text': 'This video is sponsored by X', 'start': 12.0, 'duration': 4.5}]", 1, 0},
      // strict JSON with integer times
      {R"([{"text":"ad","start":1,"duration":2}])", 1, 0},
      // fenced with language tag
      {"```json\n[{\"text\":\"ad\",\"start\":1,\"duration\":2}]\n```", 1, 0},
      // fenced without language tag
      {"```\n[{'text': 'ad', 'start': 3, 'duration': 1}]\n```", 1, 0},
      // prose wrapper
      {"Sure! Here is the ad I found:\n[{'text': 'use code FOO', 'start': 3, 'duration': 2.5}]\n"
       "Let me know if you need more.",
       1, 0},
      // trailing commas in dict and list
      {"[{'text': 'a', 'start': 1.0, 'duration': 2.0,},]", 1, 0},
      // two records
      {"[{'text': 'a', 'start': 1, 'duration': 2}, {'text': 'b', 'start': 4, 'duration': 1}]", 2,
       0},
      // mixed quoting
      {"[{'text': \"mixed\", \"start\": 2, 'duration': 1}]", 1, 0},
      // escaped quote inside single-quoted string
      {R"([{'text': 'don\'t miss this', 'start': 0, 'duration': 1}])", 1, 0},
      // numeric strings accepted
      {"[{'text': 'x', 'start': '1.5', 'duration': '2'}]", 1, 0},
      // pretty-printed multi-line record
      {"[\n  { 'text': 'ad',\n    'start': 1.0,\n    'duration': 2.0\n  }\n]", 1, 0},
      // bare keys
      {"[{text: 'a', start: 1, duration: 2}]", 1, 0},
      // scientific-notation time
      {"[{'text': 'a', 'start': 1e1, 'duration': 2.5}]", 1, 0},
      // invalid records are dropped with fragments
      {"[{'text': 'a', 'start': 1}]", 0, 1},
      {"[{'text': 'a', 'start': 'abc', 'duration': 2}]", 0, 1},
      {"[{'text': 'ok', 'start': 1, 'duration': 2}, {'start': 3, 'duration': 1}]", 1, 1},
      {"[{'text': '   ', 'start': 1, 'duration': 2}]", 0, 1},
      {"[42, {'text': 'ok', 'start': 1, 'duration': 2}]", 1, 1},
  };
  for (const auto& variant : records_cases) {
    CAPTURE(variant.content);
    auto reply = parse_llm_record_list(variant.content);
    CHECK_FALSE(reply.no_ad);
    CHECK(static_cast<int>(reply.records.size()) == variant.valid);
    CHECK(static_cast<int>(reply.invalid.size()) == variant.invalid);
  }

  const std::vector<const char*> noad_cases = {
      "None",
      "null",
      "NONE",
      "None.",
      "There is no ad in this transcript. None",
      "[]",
      "```\nNone\n```",
  };
  for (const char* content : noad_cases) {
    CAPTURE(content);
    CHECK(parse_llm_record_list(content).no_ad);
  }

  const std::vector<const char*> unparseable_cases = {
      "no list here at all",
      "[{'text': 'ad', 'start': 1.0, 'dur",  // truncated mid-record
      "The ad runs from 00:10 to 00:25.",
      "",
  };
  for (const char* content : unparseable_cases) {
    CAPTURE(content);
    try {
      parse_llm_record_list(content);
      FAIL("expected Unparseable");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Unparseable);
    }
  }
}

TEST_CASE("record list: serialize/parse identity on valid records") {
  std::mt19937 rng(41);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_int_distribution<int> words(1, 8);
  std::uniform_int_distribution<long> ms(0, 500000);
  for (int it = 0; it < 100; ++it) {
    std::vector<LlmRecord> records;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
      std::string text = sponsorscan::testing::random_sentence(rng, words(rng));
      if (it % 3 == 0) text += " isn't it";  // apostrophes must survive escaping
      records.push_back({text, ms(rng) / 1000.0, (1 + ms(rng)) / 1000.0});
    }
    auto reply = parse_llm_record_list(serialize_record_list(records));
    REQUIRE(reply.records.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) {
      CHECK(reply.records[i].text == records[i].text);
      CHECK(reply.records[i].start == doctest::Approx(records[i].start).epsilon(1e-9));
      CHECK(reply.records[i].duration == doctest::Approx(records[i].duration).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: record parsing is tri-state over arbitrary content") {
  std::mt19937 rng(4242);
  std::uniform_int_distribution<int> len(0, 80);
  const std::string alphabet = "[]{}'\",:. None null 0123456789 text start duration abc\n";
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  for (int it = 0; it < 500; ++it) {
    std::string content;
    int n = len(rng);
    for (int i = 0; i < n; ++i) content += alphabet[pick(rng)];
    try {
      auto reply = parse_llm_record_list(content);
      // success is either NoAd or a non-empty record list (valid or invalid)
      CHECK((reply.no_ad || reply.records.size() + reply.invalid.size() >= 1));
      if (reply.no_ad) CHECK(reply.records.empty());
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Unparseable);
    }
  }
}

TEST_CASE("string list: format examples") {
  CHECK(parse_llm_string_list("[science, media, product]") ==
        std::vector<std::string>{"science", "media", "product"});
  CHECK(parse_llm_string_list(R"(["a", "a", "b"])") == std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(parse_llm_string_list("no list here"), Error);
}

TEST_CASE("string list: tolerant forms") {
  CHECK(parse_llm_string_list("[a,,b]") == std::vector<std::string>{"a", "b"});
  CHECK(parse_llm_string_list("[solar panel, black hole]") ==
        std::vector<std::string>{"solar panel", "black hole"});
  CHECK(parse_llm_string_list("['solar, panel', rest]") ==
        std::vector<std::string>{"solar, panel", "rest"});
  CHECK(parse_llm_string_list("Here you go:\n[alpha,\n beta]\nCheers") ==
        std::vector<std::string>{"alpha", "beta"});
  CHECK(parse_llm_string_list("[don't stop, dogs' toys]") ==
        std::vector<std::string>{"don't stop", "dogs' toys"});
  CHECK(parse_llm_string_list("```\n[x, y]\n```") == std::vector<std::string>{"x", "y"});
  CHECK(parse_llm_string_list("[]").empty());
}
