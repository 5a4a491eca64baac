#include "sponsorscan/errors.hpp"

namespace sponsorscan {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MalformedInput: return "MalformedInput";
    case Errc::NegativeTime: return "NegativeTime";
    case Errc::MalformedTimestamp: return "MalformedTimestamp";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::DuplicateVideoId: return "DuplicateVideoId";
    case Errc::MissingFile: return "MissingFile";
    case Errc::UnknownFormatTag: return "UnknownFormatTag";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::BackendRejected: return "BackendRejected";
    case Errc::AuthError: return "AuthError";
    case Errc::ContextTooLong: return "ContextTooLong";
    case Errc::Unparseable: return "Unparseable";
    case Errc::RecordInvalid: return "RecordInvalid";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::EmptyAfterPreprocess: return "EmptyAfterPreprocess";
    case Errc::CombinatorialLimit: return "CombinatorialLimit";
    case Errc::EmptyKeywordSet: return "EmptyKeywordSet";
    case Errc::VideoWithoutKeywords: return "VideoWithoutKeywords";
    case Errc::SpanOutOfRange: return "SpanOutOfRange";
    case Errc::UnknownVideoId: return "UnknownVideoId";
    case Errc::IoError: return "IoError";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Precondition: return "Precondition";
  }
  return "Error";
}

}  // namespace sponsorscan
