#include "shcnn/error.hpp"

namespace shcnn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidLayout: return "InvalidLayout";
    case ErrorCode::DefectOutOfGrid: return "DefectOutOfGrid";
    case ErrorCode::BadMix: return "BadMix";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateContour: return "DegenerateContour";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::NoContour: return "NoContour";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::MissingAdjacency: return "MissingAdjacency";
    case ErrorCode::TooFew: return "TooFew";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyVerdict: return "EmptyVerdict";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace shcnn
