#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shcnn {

enum class ErrorCode {
  InvalidLayout,
  DefectOutOfGrid,
  BadMix,
  IoFailure,
  EmptyInput,
  DegenerateContour,
  LayoutMismatch,
  NoContour,
  ShapeMismatch,
  EmptyClass,
  DivergenceDetected,
  EmptyData,
  NonConvergence,
  UntrainedModel,
  MissingAdjacency,
  TooFew,
  LengthMismatch,
  EmptyVerdict,
  BadConfig,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; `code()` lets callers (the CLI in
// particular) distinguish failure classes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

  // Same code, message prefixed with where it happened.
  Error with_context(const std::string& where) const { return Error(code_, where + ": " + detail_); }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace shcnn
