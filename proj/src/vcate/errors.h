#ifndef VCATE_ERRORS_H_
#define VCATE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace vcate {

// Numeric values are part of the C API (see include/vcate/vcate.h) and must
// not be reordered.
enum class ErrorCode {
  kOk = 0,
  kInvalidArgument = 1,
  kInvalidK = 2,
  kTooFewUnits = 3,
  kOverlapViolation = 4,
  kNonBinaryTreatment = 5,
  kNonFiniteValue = 6,
  kEmptyArm = 7,
  kSingularGram = 8,
  kSingularJ = 9,
  kDegenerateOmega11 = 10,
  kGridExhausted = 11,
  kParseError = 12,
  kConfigError = 13,
  kInternal = 99,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace vcate

#endif  // VCATE_ERRORS_H_
