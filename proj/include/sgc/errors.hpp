#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgc {

/// Machine-readable error classes. The CLI prints the name of the class so
/// scripts can branch on it.
enum class ErrorKind {
  ConvergenceFailure,
  SingularSystem,
  DimensionMismatch,
  KTooLarge,
  NonFiniteInput,
  NonPositiveSigma,
  ZeroColumn,
  NotMeanRemoved,
  DegenerateData,
  NotSquare,
  NotSymmetric,
  OrphanColumn,
  RankDeficient,
  EmptyClass,
  InvalidArgument,
  OrthogonalTarget,
  IdealConditionViolated,
  ParseError,
  EmptyDataset,
  InconsistentDimension,
  DatasetTooLarge,
  TooFewSamples,
  TooFewSamplesPerClass,
  ZeroVector,
  LabelOutOfRange,
  ModelFormat,
  IoError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorKind::ZeroColumn: return "ZeroColumn";
    case ErrorKind::NotMeanRemoved: return "NotMeanRemoved";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::OrphanColumn: return "OrphanColumn";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OrthogonalTarget: return "OrthogonalTarget";
    case ErrorKind::IdealConditionViolated: return "IdealConditionViolated";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::InconsistentDimension: return "InconsistentDimension";
    case ErrorKind::DatasetTooLarge: return "DatasetTooLarge";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::TooFewSamplesPerClass: return "TooFewSamplesPerClass";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::ModelFormat: return "ModelFormat";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace sgc
