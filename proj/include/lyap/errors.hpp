#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lyap {

/// Failure categories raised by the library. The CLI maps each category onto
/// one of its documented exit codes.
enum class ErrorKind {
  InvalidMatrix,
  DegenerateMatrix,
  NotPositiveDefinite,
  NotNormal,
  ApHypothesisViolated,
  SequenceTooShort,
  SandwichViolated,
  AlphaTooLarge,
  QuadratureUnderresolved,
  DomainError,
  UnknownSymbol,
  NearSingularArgument,
  HypothesisNotMet,
  CertificateBroken,
  BoundViolated,
  PerturbationTooLarge,
  MixedRegime,
  EnergyTooLarge,
  BadConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotNormal: return "NotNormal";
    case ErrorKind::ApHypothesisViolated: return "APHypothesisViolated";
    case ErrorKind::SequenceTooShort: return "SequenceTooShort";
    case ErrorKind::SandwichViolated: return "SandwichViolated";
    case ErrorKind::AlphaTooLarge: return "AlphaTooLarge";
    case ErrorKind::QuadratureUnderresolved: return "QuadratureUnderresolved";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::NearSingularArgument: return "NearSingularArgument";
    case ErrorKind::HypothesisNotMet: return "HypothesisNotMet";
    case ErrorKind::CertificateBroken: return "CertificateBroken";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::PerturbationTooLarge: return "PerturbationTooLarge";
    case ErrorKind::MixedRegime: return "MixedRegime";
    case ErrorKind::EnergyTooLarge: return "EnergyTooLarge";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// True for errors that indicate a violated mathematical guarantee (a bug or
/// numerically singular input) rather than unmet preconditions.
constexpr bool is_assertion_failure(ErrorKind kind) {
  return kind == ErrorKind::SandwichViolated ||
         kind == ErrorKind::CertificateBroken ||
         kind == ErrorKind::BoundViolated ||
         kind == ErrorKind::QuadratureUnderresolved;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace lyap
