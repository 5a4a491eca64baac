#include "sponsorscan/reply_parse.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <optional>

#include "sponsorscan/errors.hpp"
#include "sponsorscan/util.hpp"

using nlohmann::json;

namespace sponsorscan {

namespace {

// If the content carries a ``` fence, work with the first fenced body.
std::string strip_code_fences(const std::string& content) {
  size_t open = content.find("```");
  if (open == std::string::npos) return content;
  size_t body = content.find('\n', open);
  if (body == std::string::npos) return content;
  ++body;
  size_t close = content.find("```", body);
  std::string inner =
      close == std::string::npos ? content.substr(body) : content.substr(body, close - body);
  return trim(inner).empty() ? content : inner;
}

// Recursive-descent parser over the python/JSON hybrid the model emits.
struct TolerantParser {
  const std::string& src;
  size_t pos = 0;

  explicit TolerantParser(const std::string& s) : src(s) {}

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool eof() const { return pos >= src.size(); }

  char peek() const { return src[pos]; }

  [[noreturn]] void fail(const std::string& why) const {
    raise(Errc::Unparseable, why + " at offset " + std::to_string(pos));
  }

  std::string parse_quoted(char quote) {
    ++pos;  // opening quote
    std::string out;
    while (true) {
      if (eof()) fail("unterminated string");
      char c = src[pos++];
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        char e = src[pos++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: out += e; break;  // \' \" \\ and anything else pass through
        }
      } else if (c == quote) {
        return out;
      } else {
        out += c;
      }
    }
  }

  std::string parse_bare_word() {
    size_t begin = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    if (pos == begin) fail("expected value");
    return src.substr(begin, pos - begin);
  }

  json parse_number() {
    size_t begin = pos;
    if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
    bool saw_digit = false;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
      ++pos;
      saw_digit = true;
    }
    if (pos < src.size() && src[pos] == '.') {
      ++pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
        ++pos;
        saw_digit = true;
      }
    }
    if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
      ++pos;
      if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    if (!saw_digit) fail("expected number");
    return json(std::strtod(src.substr(begin, pos - begin).c_str(), nullptr));
  }

  json parse_value() {
    skip_ws();
    if (eof()) fail("expected value");
    char c = peek();
    if (c == '[') return parse_list();
    if (c == '{') return parse_dict();
    if (c == '\'' || c == '"') return json(parse_quoted(c));
    if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)))
      return parse_number();
    std::string word = parse_bare_word();
    std::string lower = to_lower(word);
    if (lower == "none" || lower == "null") return json(nullptr);
    if (lower == "true") return json(true);
    if (lower == "false") return json(false);
    return json(word);  // bare identifier -> string
  }

  json parse_list() {
    ++pos;  // [
    json out = json::array();
    while (true) {
      skip_ws();
      if (eof()) fail("unterminated list");
      if (peek() == ']') {
        ++pos;
        return out;
      }
      out.push_back(parse_value());
      skip_ws();
      if (eof()) fail("unterminated list");
      if (peek() == ',') {
        ++pos;
        continue;
      }
      if (peek() == ']') {
        ++pos;
        return out;
      }
      fail("expected , or ]");
    }
  }

  json parse_dict() {
    ++pos;  // {
    json out = json::object();
    while (true) {
      skip_ws();
      if (eof()) fail("unterminated dict");
      if (peek() == '}') {
        ++pos;
        return out;
      }
      std::string key;
      char c = peek();
      if (c == '\'' || c == '"') key = parse_quoted(c);
      else key = parse_bare_word();
      skip_ws();
      if (eof() || peek() != ':') fail("expected :");
      ++pos;
      out[key] = parse_value();
      skip_ws();
      if (eof()) fail("unterminated dict");
      if (peek() == ',') {
        ++pos;
        continue;
      }
      if (peek() == '}') {
        ++pos;
        return out;
      }
      fail("expected , or }");
    }
  }
};

// First well-formed bracketed list in the text, trying each '[' in turn.
std::optional<json> find_first_list(const std::string& text) {
  for (size_t at = text.find('['); at != std::string::npos; at = text.find('[', at + 1)) {
    TolerantParser parser(text);
    parser.pos = at;
    try {
      return parser.parse_list();
    } catch (const Error&) {
      continue;
    }
  }
  return std::nullopt;
}

bool contains_none_literal(const std::string& text) {
  std::string lower = to_lower(text);
  for (size_t i = 0; i < lower.size();) {
    if (!std::isalpha(static_cast<unsigned char>(lower[i]))) {
      ++i;
      continue;
    }
    size_t begin = i;
    while (i < lower.size() && std::isalpha(static_cast<unsigned char>(lower[i]))) ++i;
    std::string word = lower.substr(begin, i - begin);
    if (word == "none" || word == "null") return true;
  }
  return false;
}

std::optional<double> numeric_field(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string& s = value.get<std::string>();
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end && *end == '\0' && end != s.c_str()) return v;
  }
  return std::nullopt;
}

}  // namespace

RecordListReply parse_llm_record_list(const std::string& content) {
  std::string body = strip_code_fences(content);
  RecordListReply reply;

  auto list = find_first_list(body);
  if (!list) {
    if (contains_none_literal(body)) {
      reply.no_ad = true;
      return reply;
    }
    raise(Errc::Unparseable, "no record list and no None literal in reply");
  }

  if (list->empty()) {  // "[]" means the model found nothing
    reply.no_ad = true;
    return reply;
  }

  for (const auto& item : *list) {
    if (!item.is_object()) {
      reply.invalid.push_back(item.dump());
      continue;
    }
    if (!item.contains("text") || !item.contains("start") || !item.contains("duration")) {
      reply.invalid.push_back(item.dump());
      continue;
    }
    auto start = numeric_field(item["start"]);
    auto duration = numeric_field(item["duration"]);
    std::string text = item["text"].is_string() ? item["text"].get<std::string>() : "";
    if (!start || !duration || trim(text).empty() || !std::isfinite(*start) ||
        !std::isfinite(*duration)) {
      reply.invalid.push_back(item.dump());
      continue;
    }
    reply.records.push_back({text, *start, *duration});
  }
  return reply;
}

std::vector<std::string> parse_llm_string_list(const std::string& content) {
  std::string body = strip_code_fences(content);

  size_t open = body.find('[');
  if (open == std::string::npos) raise(Errc::Unparseable, "no bracketed list in reply");
  size_t close = std::string::npos;
  int depth = 0;
  for (size_t i = open; i < body.size(); ++i) {
    if (body[i] == '[') ++depth;
    else if (body[i] == ']' && --depth == 0) {
      close = i;
      break;
    }
  }
  if (close == std::string::npos) raise(Errc::Unparseable, "unterminated list in reply");

  // A quote opens a string only at item start; an apostrophe inside a word
  // ("don't") is literal text.
  std::string inner = body.substr(open + 1, close - open - 1);
  std::vector<std::string> items;
  std::string cur;
  bool has_content = false;
  char quote = 0;
  for (size_t i = 0; i < inner.size(); ++i) {
    char c = inner[i];
    if (quote) {
      if (c == '\\' && i + 1 < inner.size()) {
        cur += inner[++i];
      } else if (c == quote) {
        quote = 0;
      } else {
        cur += c;
      }
    } else if ((c == '\'' || c == '"') && !has_content) {
      quote = c;
      has_content = true;
    } else if (c == ',' || c == '\n') {
      items.push_back(trim(cur));
      cur.clear();
      has_content = false;
    } else {
      if (!std::isspace(static_cast<unsigned char>(c)) || has_content) {
        cur += c;
        if (!std::isspace(static_cast<unsigned char>(c))) has_content = true;
      }
    }
  }
  items.push_back(trim(cur));

  std::vector<std::string> out;
  for (auto& item : items) {
    if (item.empty()) continue;
    bool dup = false;
    for (const auto& seen : out)
      if (seen == item) dup = true;
    if (!dup) out.push_back(item);
  }
  return out;
}

std::string serialize_record_list(const std::vector<LlmRecord>& records) {
  std::string out = "[";
  for (size_t i = 0; i < records.size(); ++i) {
    if (i) out += ",";
    std::string text;
    for (char c : records[i].text) {
      if (c == '\\' || c == '\'') text += '\\';
      text += c;
    }
    out += "\n  { 'text': '" + text + "', 'start': " + format_seconds_float(records[i].start) +
           ", 'duration': " + format_seconds_float(records[i].duration) + " }";
  }
  out += records.empty() ? "]" : "\n]";
  return out;
}

}  // namespace sponsorscan
