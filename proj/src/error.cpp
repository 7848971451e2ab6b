#include "screwreg/error.hpp"

namespace screwreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::CoincidentLandmarks: return "CoincidentLandmarks";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::VertexAtInfinity: return "VertexAtInfinity";
    case ErrorCode::NegativeDepth: return "NegativeDepth";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ScrewOutOfView: return "ScrewOutOfView";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InconsistentReport: return "InconsistentReport";
  }
  return "Unknown";
}

}  // namespace screwreg
