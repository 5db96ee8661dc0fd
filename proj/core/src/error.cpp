#include "secord/error.hpp"

namespace secord {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::DivergentIntegral: return "DivergentIntegral";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::StructureMismatch: return "StructureMismatch";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::InternalVerificationFailed: return "InternalVerificationFailed";
    case ErrorCode::SingularWronskian: return "SingularWronskian";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::BranchRequired: return "BranchRequired";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::ZeroMu: return "ZeroMu";
    case ErrorCode::NoRootInBracket: return "NoRootInBracket";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::LeadingCoefficientVanished: return "LeadingCoefficientVanished";
    case ErrorCode::EmptyGridAfterTrim: return "EmptyGridAfterTrim";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace secord
