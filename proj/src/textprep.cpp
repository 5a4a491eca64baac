#include "sponsorscan/textprep.hpp"

#include <cctype>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/util.hpp"

namespace sponsorscan {

const char* profile_name(PrepProfile profile) {
  return profile == PrepProfile::LightClean ? "light" : "full";
}

PrepProfile profile_from_name(const std::string& name) {
  std::string n = to_lower(trim(name));
  if (n == "light" || n == "lightclean") return PrepProfile::LightClean;
  if (n == "full" || n == "fullpipeline") return PrepProfile::FullPipeline;
  raise(Errc::InvalidConfig, "unknown preprocessing profile: " + name);
}

std::string clean_text(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    char keep = 0;
    if (c >= 'a' && c <= 'z') keep = static_cast<char>(c);
    else if (c >= 'A' && c <= 'Z') keep = static_cast<char>(c - 'A' + 'a');
    else if (c >= '0' && c <= '9') keep = static_cast<char>(c);
    else if (c == '\'') keep = '\'';
    if (keep) {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += keep;
    } else {
      pending_space = true;  // whitespace and stripped characters both collapse
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& cleaned) { return split_ws(cleaned); }

StopwordList StopwordList::load(const std::string& path) {
  StopwordList list;
  for (const auto& line : split_lines(read_file(path))) {
    std::string word = to_lower(trim(line));
    if (!word.empty() && word[0] != '#') list.words_.insert(word);
  }
  return list;
}

StopwordList StopwordList::from_words(const std::vector<std::string>& words) {
  StopwordList list;
  for (const auto& w : words) list.words_.insert(to_lower(trim(w)));
  list.words_.erase("");
  return list;
}

std::vector<SuffixRule> LemmaTable::default_suffix_rules() {
  return {
      {"'s", "", 1, {}, false},
      {"'", "", 1, {}, false},
      {"ies", "y", 2, {}, false},
      {"es", "", 3, {}, false},
      {"ing", "", 3, {}, true},
      {"ed", "", 3, {}, true},
      {"s", "", 2, {"ss", "us", "is"}, false},
  };
}

LemmaTable::LemmaTable() : rules_(default_suffix_rules()) {}

LemmaTable LemmaTable::load(const std::string& path) {
  LemmaTable table;
  int lineno = 0;
  for (const auto& line : split_lines(read_file(path))) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t tab = t.find('\t');
    if (tab == std::string::npos)
      raise(Errc::MalformedInput, "lemma table line " + std::to_string(lineno) + ": expected TAB");
    table.add(trim(t.substr(0, tab)), trim(t.substr(tab + 1)));
  }
  return table;
}

void LemmaTable::add(const std::string& inflected, const std::string& lemma) {
  table_[to_lower(inflected)] = to_lower(lemma);
}

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_double_consonant(const std::string& s) {
  if (s.size() < 2) return false;
  char a = s[s.size() - 2], b = s[s.size() - 1];
  return a == b && a >= 'a' && a <= 'z' && !is_vowel(a);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string LemmaTable::step(const std::string& token) const {
  auto it = table_.find(token);
  if (it != table_.end()) return it->second;
  for (const auto& rule : rules_) {
    if (!ends_with(token, rule.suffix)) continue;
    std::string stem = token.substr(0, token.size() - rule.suffix.size());
    if (stem.size() < rule.min_stem) continue;
    bool blocked = false;
    for (const auto& ending : rule.skip_endings)
      if (ends_with(token, ending)) blocked = true;
    if (rule.skip_double_consonant_stem && ends_double_consonant(stem)) blocked = true;
    if (blocked) continue;
    return stem + rule.replacement;
  }
  return token;
}

std::string LemmaTable::lemmatize(const std::string& token) const {
  std::string cur = token;
  for (int i = 0; i < 6; ++i) {
    std::string next = step(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordList& stopwords) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!stopwords.contains(t)) out.push_back(t);
  return out;
}

std::vector<std::string> lemmatize(const std::vector<std::string>& tokens,
                                   const LemmaTable& table) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    std::string lemma = table.lemmatize(t);
    if (!lemma.empty()) out.push_back(std::move(lemma));
  }
  return out;
}

PrepContext load_prep_context(const std::string& stopword_path, const std::string& lemma_path) {
  return {StopwordList::load(stopword_path), LemmaTable::load(lemma_path)};
}

CleanDoc preprocess(const std::string& s, PrepProfile profile, const PrepContext& ctx) {
  CleanDoc doc;
  doc.original = s;
  doc.profile = profile;
  doc.tokens = tokenize(clean_text(s));
  if (profile == PrepProfile::FullPipeline) {
    doc.tokens = remove_stopwords(doc.tokens, ctx.stopwords);
    doc.tokens = lemmatize(doc.tokens, ctx.lemmas);
    doc.tokens = remove_stopwords(doc.tokens, ctx.stopwords);
  }
  return doc;
}

}  // namespace sponsorscan
