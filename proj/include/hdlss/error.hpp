#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdlss {

enum class ErrorKind {
  InvalidArgument,
  InvalidModel,
  InvalidDimension,
  InvalidIndex,
  UndefinedSphericity,
  UnsupportedEigenvector,
  Shape,
  InvalidMatrix,
  RankDeficiency,
  UnsupportedStructure,
  BoundaryUnsupported,
  InsufficientData,
  ExcessiveFailures,
  Configuration,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so front ends can map
/// it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidModel: return "invalid-model";
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::InvalidIndex: return "invalid-index";
    case ErrorKind::UndefinedSphericity: return "undefined-sphericity";
    case ErrorKind::UnsupportedEigenvector: return "unsupported-eigenvector";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::InvalidMatrix: return "invalid-matrix";
    case ErrorKind::RankDeficiency: return "rank-deficiency";
    case ErrorKind::UnsupportedStructure: return "unsupported-structure";
    case ErrorKind::BoundaryUnsupported: return "boundary-unsupported";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::ExcessiveFailures: return "excessive-failures";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace hdlss
