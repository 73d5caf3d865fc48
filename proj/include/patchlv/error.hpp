#ifndef PATCHLV_ERROR_HPP
#define PATCHLV_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace patchlv {

enum class ErrorKind {
  InvalidInput,
  CapExceeded,
  NotStronglyConnected,
  NotCycleBalanced,
  NotComplete,
  PairSumNegative,
  NotQuasiPositive,
  NotIrreducible,
  NonConvergence,
  SpectralBoundNotZero,
  StepSizeTooLarge,
  NewtonDiverged,
  AssumptionViolated,
  ProportionalResource,
  TiedResources,
  OneSidedResources,
  InvariantViolated,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorKind::NotCycleBalanced: return "NotCycleBalanced";
    case ErrorKind::NotComplete: return "NotComplete";
    case ErrorKind::PairSumNegative: return "PairSumNegative";
    case ErrorKind::NotQuasiPositive: return "NotQuasiPositive";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SpectralBoundNotZero: return "SpectralBoundNotZero";
    case ErrorKind::StepSizeTooLarge: return "StepSizeTooLarge";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::AssumptionViolated: return "AssumptionViolated";
    case ErrorKind::ProportionalResource: return "ProportionalResource";
    case ErrorKind::TiedResources: return "TiedResources";
    case ErrorKind::OneSidedResources: return "OneSidedResources";
    case ErrorKind::InvariantViolated: return "InvariantViolated";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so that
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace patchlv

#endif  // PATCHLV_ERROR_HPP
