#include "thenon/errors.hpp"

namespace thenon {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MagnitudeOverflow: return "MagnitudeOverflow";
    case ErrorKind::ScanBudgetExceeded: return "ScanBudgetExceeded";
    case ErrorKind::SearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::NoAdmissibleFrame: return "NoAdmissibleFrame";
    case ErrorKind::DerivativeVanishes: return "DerivativeVanishes";
    case ErrorKind::StepLeftDomain: return "StepLeftDomain";
    case ErrorKind::NoAdmissibleRadius: return "NoAdmissibleRadius";
    case ErrorKind::BranchNewtonFailed: return "BranchNewtonFailed";
    case ErrorKind::DepthUnrepresentable: return "DepthUnrepresentable";
    case ErrorKind::PullbackOutsideDomain: return "PullbackOutsideDomain";
    case ErrorKind::NewtonFailed: return "NewtonFailed";
    case ErrorKind::ConeViolation: return "ConeViolation";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

bool is_numerical(ErrorKind kind) {
    return kind != ErrorKind::ValidationError && kind != ErrorKind::IoError;
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

}  // namespace thenon
