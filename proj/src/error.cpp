#include "tweetprobe/error.hpp"

namespace tweetprobe {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::DanglingAnnotation: return "DanglingAnnotation";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::ZeroLength: return "ZeroLength";
    case ErrorKind::InvalidBinSize: return "InvalidBinSize";
    case ErrorKind::NoNegativeCandidate: return "NoNegativeCandidate";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::MissingAnnotation: return "MissingAnnotation";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::MissingKey: return "MissingKey";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::DuplicateRun: return "DuplicateRun";
    case ErrorKind::StaleArtifact: return "StaleArtifact";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace tweetprobe
