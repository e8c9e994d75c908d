#include "deltap/common.hpp"

namespace deltap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NotIdempotent: return "NotIdempotent";
    case ErrorCode::NotBaseElement: return "NotBaseElement";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::RepOutsideBlock: return "RepOutsideBlock";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::HypothesisNotMet: return "HypothesisNotMet";
    case ErrorCode::NoWindowFound: return "NoWindowFound";
    case ErrorCode::WitnessInvalid: return "WitnessInvalid";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::FixedPointViolated: return "FixedPointViolated";
    case ErrorCode::CannotValidate: return "CannotValidate";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace deltap
