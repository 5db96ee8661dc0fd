#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace secord {

enum class ErrorCode {
  SyntaxError,
  UnknownIdentifier,
  ArityError,
  DomainError,
  DivisionByZero,
  NonPositiveWeight,
  DivergentIntegral,
  OutOfRange,
  StructureMismatch,
  NegativeRadicand,
  InternalVerificationFailed,
  SingularWronskian,
  OutOfDomain,
  BranchRequired,
  RangeViolation,
  InsufficientSamples,
  ZeroMu,
  NoRootInBracket,
  NonMonotone,
  StepSizeUnderflow,
  LeadingCoefficientVanished,
  EmptyGridAfterTrim,
  PreconditionFailed,
  InvalidInput,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for every failure in the library. Carries the
/// module and operation that raised it plus the offending point, if any.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, std::string operation,
        const std::string& message, std::vector<double> point = {})
      : std::runtime_error(message),
        code_(code),
        module_(std::move(module)),
        operation_(std::move(operation)),
        point_(std::move(point)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string operation_;
  std::vector<double> point_;
};

/// Re-raise `e` under a new module/operation context, keeping code and point.
[[noreturn]] inline void rethrow_in(const Error& e, std::string module,
                                    std::string operation,
                                    const std::string& prefix = {}) {
  throw Error(e.code(), std::move(module), std::move(operation),
              prefix.empty() ? std::string(e.what()) : prefix + ": " + e.what(),
              e.point());
}

}  // namespace secord
