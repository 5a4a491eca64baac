#pragma once

#include <stdexcept>
#include <string>

namespace sponsorscan {

enum class Errc {
  // transcript / manifest
  MalformedInput,
  NegativeTime,
  MalformedTimestamp,
  MissingHeader,
  DuplicateVideoId,
  MissingFile,
  UnknownFormatTag,
  // llm gateway
  BackendUnavailable,
  BackendRejected,
  AuthError,
  ContextTooLong,
  Unparseable,
  RecordInvalid,
  // embeddings / keywords
  DimensionMismatch,
  ZeroVector,
  EmptyAfterPreprocess,
  CombinatorialLimit,
  // grouping / analytics
  EmptyKeywordSet,
  VideoWithoutKeywords,
  SpanOutOfRange,
  UnknownVideoId,
  // plumbing
  IoError,
  InvalidConfig,
  Precondition,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace sponsorscan
