#include "sponsorscan/textprep.hpp"

#include <doctest.h>

#include <random>

#include "sponsorscan/util.hpp"

using namespace sponsorscan;

namespace {

const PrepContext& ctx() {
  static PrepContext prep = load_prep_context(std::string(SPONSORSCAN_DATA_DIR) + "/stopwords.txt",
                                              std::string(SPONSORSCAN_DATA_DIR) + "/lemmas.tsv");
  return prep;
}

}  // namespace

TEST_CASE("clean_text: forced examples") {
  CHECK(clean_text("Hello, World!!") == "hello world");
  CHECK(clean_text("") == "");
  CHECK(clean_text("don't  stop") == "don't stop");
  CHECK(clean_text("a\tb\nc") == "a b c");
  CHECK(clean_text("Ünïcode stripped") == "n code stripped");
  CHECK(clean_text("...") == "");
  CHECK(clean_text("42 is The answer") == "42 is the answer");
}

TEST_CASE("clean_text output alphabet is [a-z0-9' ]") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> len(0, 60);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int it = 0; it < 200; ++it) {
    std::string s;
    int n = len(rng);
    for (int i = 0; i < n; ++i) s += static_cast<char>(byte(rng));
    for (unsigned char c : clean_text(s)) {
      bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'' || c == ' ';
      CHECK(ok);
    }
  }
}

TEST_CASE("remove_stopwords keeps order") {
  std::vector<std::string> tokens = {"the", "quick", "brown", "fox"};
  auto kept = remove_stopwords(tokens, ctx().stopwords);
  CHECK(kept == std::vector<std::string>{"quick", "brown", "fox"});
  CHECK(remove_stopwords({}, ctx().stopwords).empty());
  CHECK(remove_stopwords({"the", "a", "an", "is"}, ctx().stopwords).empty());
  CHECK(ctx().stopwords.size() > 150);
}

TEST_CASE("lemmatize: table and suffix rules") {
  const auto& table = ctx().lemmas;
  CHECK(table.lemmatize("running") == "run");   // bundled table
  CHECK(table.lemmatize("run") == "run");       // fixed point
  CHECK(table.lemmatize("studies") == "study"); // ies -> y
  CHECK(table.lemmatize("cats") == "cat");
  CHECK(table.lemmatize("boxes") == "box");
  CHECK(table.lemmatize("glasses") == "glass");
  CHECK(table.lemmatize("jumped") == "jump");
  CHECK(table.lemmatize("children") == "child");
  CHECK(table.lemmatize("news") == "news");     // protected s-final lemma
  CHECK(table.lemmatize("physics") == "physics");
  CHECK(table.lemmatize("world's") == "world");
}

TEST_CASE("lemmatize is a fixed-point operator") {
  const auto& table = ctx().lemmas;
  // stacked suffixes resolve in one call
  CHECK(table.lemmatize("settings") == "set");
  CHECK(table.lemmatize(table.lemmatize("settings")) == table.lemmatize("settings"));

  std::mt19937 rng(17);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<int> letter(0, 26);
  for (int it = 0; it < 500; ++it) {
    std::string token;
    int n = len(rng);
    for (int i = 0; i < n; ++i) {
      int l = letter(rng);
      token += l == 26 ? '\'' : static_cast<char>('a' + l);
    }
    std::string once = table.lemmatize(token);
    CHECK(table.lemmatize(once) == once);
  }
}

TEST_CASE("lemmatization never increases token count") {
  std::vector<std::string> tokens = {"cats", "running", "'", "studies"};
  CHECK(lemmatize(tokens, ctx().lemmas).size() <= tokens.size());
}

TEST_CASE("preprocess: profile behavior on the worked example") {
  auto full = preprocess("The cats are running", PrepProfile::FullPipeline, ctx());
  CHECK(full.tokens == std::vector<std::string>{"cat", "run"});

  auto light = preprocess("The cats are running", PrepProfile::LightClean, ctx());
  CHECK(light.tokens == std::vector<std::string>{"the", "cats", "are", "running"});

  CHECK(preprocess("", PrepProfile::FullPipeline, ctx()).tokens.empty());
  CHECK(preprocess("", PrepProfile::LightClean, ctx()).tokens.empty());
}

TEST_CASE("preprocess: no stopword survives the full pipeline") {
  // "cans" lemmatizes to "can", which is itself a stopword
  auto doc = preprocess("the cans are useful", PrepProfile::FullPipeline, ctx());
  for (const auto& t : doc.tokens) CHECK_FALSE(ctx().stopwords.contains(t));
}

TEST_CASE("property: preprocess is idempotent under both profiles") {
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> words(0, 12);
  std::uniform_int_distribution<int> len(1, 10);
  std::uniform_int_distribution<int> letter(0, 26);
  for (int it = 0; it < 300; ++it) {
    std::string text;
    int n = words(rng);
    for (int w = 0; w < n; ++w) {
      if (w) text += ' ';
      int m = len(rng);
      for (int i = 0; i < m; ++i) {
        int l = letter(rng);
        text += l == 26 ? '\'' : static_cast<char>('a' + l);
      }
    }
    for (PrepProfile profile : {PrepProfile::LightClean, PrepProfile::FullPipeline}) {
      auto once = preprocess(text, profile, ctx());
      auto twice = preprocess(join(once.tokens, " "), profile, ctx());
      CHECK(twice.tokens == once.tokens);
    }
  }
}

TEST_CASE("property: full pipeline is an order-preserving refinement of light") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> words(1, 15);
  const std::vector<std::string> pool = {"the",     "cats",   "are",     "running", "quantum",
                                         "fields",  "studies", "showed", "a",       "planet",
                                         "orbits",  "with",   "energy",  "waves",   "don't"};
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  for (int it = 0; it < 100; ++it) {
    std::string text;
    int n = words(rng);
    for (int w = 0; w < n; ++w) {
      if (w) text += ' ';
      text += pool[pick(rng)];
    }
    auto light = preprocess(text, PrepProfile::LightClean, ctx());
    auto full = preprocess(text, PrepProfile::FullPipeline, ctx());
    CHECK(full.tokens.size() <= light.tokens.size());
    // every full token must be the lemma of some light token, in order
    size_t li = 0;
    for (const auto& token : full.tokens) {
      bool matched = false;
      while (li < light.tokens.size()) {
        if (ctx().lemmas.lemmatize(light.tokens[li++]) == token) {
          matched = true;
          break;
        }
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("stopword and lemma files can be overridden") {
  StopwordList custom = StopwordList::from_words({"foo", "bar"});
  CHECK(custom.contains("foo"));
  CHECK_FALSE(custom.contains("the"));

  LemmaTable table;  // default rules only
  table.add("mice", "mouse");
  CHECK(table.lemmatize("mice") == "mouse");
  CHECK(table.lemmatize("tries") == "try");
}
