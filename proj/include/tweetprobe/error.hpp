// Error taxonomy shared by every module. Each failure mode the library can
// report carries a machine-checkable kind; the CLI maps kinds to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace tweetprobe {

enum class ErrorKind {
  // corpus
  MalformedRecord,
  DanglingAnnotation,
  DuplicateId,
  ZeroLength,
  // taskgen
  InvalidBinSize,
  NoNegativeCandidate,
  InsufficientData,
  MissingAnnotation,
  // encoders
  EmptyCorpus,
  DimensionMismatch,
  MalformedLine,
  MissingKey,
  DuplicateKey,
  // probe
  EmptySplit,
  NonFiniteLoss,
  NonFiniteValue,
  LengthMismatch,
  EmptyInput,
  // analysis
  TooFewPoints,
  ZeroVariance,
  DuplicateRun,
  // pipeline
  StaleArtifact,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace tweetprobe
