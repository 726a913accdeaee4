#include "vcate/errors.h"

namespace vcate {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kTooFewUnits: return "TooFewUnits";
    case ErrorCode::kOverlapViolation: return "OverlapViolation";
    case ErrorCode::kNonBinaryTreatment: return "NonBinaryTreatment";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kEmptyArm: return "EmptyArm";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kSingularJ: return "SingularJ";
    case ErrorCode::kDegenerateOmega11: return "DegenerateOmega11";
    case ErrorCode::kGridExhausted: return "GridExhausted";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(ErrorCodeName(code)) + ": " + message);
}

}  // namespace vcate
