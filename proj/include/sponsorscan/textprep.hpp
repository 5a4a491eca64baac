#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace sponsorscan {

enum class PrepProfile { LightClean, FullPipeline };

const char* profile_name(PrepProfile profile);
PrepProfile profile_from_name(const std::string& name);  // "light" | "full"

struct CleanDoc {
  std::string original;
  std::vector<std::string> tokens;  // lowercase, each matching [a-z0-9']+
  PrepProfile profile = PrepProfile::LightClean;
};

// Lowercases; replaces anything outside [a-z0-9'] and whitespace with a space;
// collapses whitespace runs; trims.
std::string clean_text(const std::string& s);
std::vector<std::string> tokenize(const std::string& cleaned);

class StopwordList {
 public:
  static StopwordList load(const std::string& path);  // one word per line
  static StopwordList from_words(const std::vector<std::string>& words);

  bool contains(const std::string& token) const { return words_.count(token) > 0; }
  size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

struct SuffixRule {
  std::string suffix;
  std::string replacement;
  size_t min_stem = 2;                     // minimum token length left after stripping
  std::vector<std::string> skip_endings;   // token endings that block the rule
  bool skip_double_consonant_stem = false; // block when the stem ends in a doubled consonant
};

// Lookup table of irregular forms plus ordered suffix rules. Table entry wins;
// otherwise the first matching rule applies. lemmatize() iterates that step to
// a fixed point so re-lemmatizing output is a no-op.
class LemmaTable {
 public:
  LemmaTable();
  static LemmaTable load(const std::string& path);  // lines: inflected<TAB>lemma
  static std::vector<SuffixRule> default_suffix_rules();

  void add(const std::string& inflected, const std::string& lemma);
  std::string lemmatize(const std::string& token) const;
  size_t size() const { return table_.size(); }

 private:
  std::string step(const std::string& token) const;
  std::unordered_map<std::string, std::string> table_;
  std::vector<SuffixRule> rules_;
};

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordList& stopwords);
std::vector<std::string> lemmatize(const std::vector<std::string>& tokens,
                                   const LemmaTable& table);

struct PrepContext {
  StopwordList stopwords;
  LemmaTable lemmas;
};

PrepContext load_prep_context(const std::string& stopword_path, const std::string& lemma_path);

// LightClean: clean + tokenize. FullPipeline: clean + tokenize + stopword
// removal + lemmatization (+ a final stopword filter, since a lemma can land
// on the stopword list).
CleanDoc preprocess(const std::string& s, PrepProfile profile, const PrepContext& ctx);

}  // namespace sponsorscan
