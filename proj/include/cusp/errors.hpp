#pragma once

#include <stdexcept>
#include <string>

namespace cusp {

enum class ErrorCode {
  AmbiguousClassification,
  InvalidDomain,
  ParseError,
  CuspidalBoundary,
  InadmissibleWord,
  PoleProximity,
  DoesNotMeetDomain,
  EventuallyCuspidal,
  UnboundedDisc,
  PreconditionFailed,
  HoleBudgetExhausted,
  TargetOutOfRange,
  StableGapNotSatisfied,
  BelowThreshold,
  BelowMargulis,
  OutsideU_l,
  BoundViolated,
  BlockTooLong,
  CertificateTooWeak,
  LipConditionFailed,
};

inline const char* code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::AmbiguousClassification: return "AmbiguousClassification";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CuspidalBoundary: return "CuspidalBoundary";
    case ErrorCode::InadmissibleWord: return "InadmissibleWord";
    case ErrorCode::PoleProximity: return "PoleProximity";
    case ErrorCode::DoesNotMeetDomain: return "DoesNotMeetDomain";
    case ErrorCode::EventuallyCuspidal: return "EventuallyCuspidal";
    case ErrorCode::UnboundedDisc: return "UnboundedDisc";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::HoleBudgetExhausted: return "HoleBudgetExhausted";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::StableGapNotSatisfied: return "StableGapNotSatisfied";
    case ErrorCode::BelowThreshold: return "BelowThreshold";
    case ErrorCode::BelowMargulis: return "BelowMargulis";
    case ErrorCode::OutsideU_l: return "OutsideU_l";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::BlockTooLong: return "BlockTooLong";
    case ErrorCode::CertificateTooWeak: return "CertificateTooWeak";
    case ErrorCode::LipConditionFailed: return "LipConditionFailed";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Carries the position in a stream where a failure was detected.
class IndexedError : public Error {
 public:
  IndexedError(ErrorCode code, long index, const std::string& what)
      : Error(code, what + " at index " + std::to_string(index)),
        index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

}  // namespace cusp
