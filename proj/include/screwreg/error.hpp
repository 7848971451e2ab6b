#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace screwreg {

enum class ErrorCode {
  PointAtInfinity,
  DegenerateGeometry,
  CoincidentLandmarks,
  ParseError,
  EmptyMesh,
  VertexAtInfinity,
  NegativeDepth,
  DimensionMismatch,
  ImageTooSmall,
  BothEmpty,
  InvalidBounds,
  InvalidConfig,
  InvalidSpec,
  ScrewOutOfView,
  InvalidArgument,
  IoError,
  InconsistentReport,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace screwreg
