#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thenon {

enum class ErrorKind {
    MagnitudeOverflow,
    ScanBudgetExceeded,
    SearchBudgetExceeded,
    OutsideDomain,
    NoConvergence,
    SingularJacobian,
    NoAdmissibleFrame,
    DerivativeVanishes,
    StepLeftDomain,
    NoAdmissibleRadius,
    BranchNewtonFailed,
    DepthUnrepresentable,
    PullbackOutsideDomain,
    NewtonFailed,
    ConeViolation,
    BudgetExceeded,
    IoError,
    ValidationError,
};

std::string_view to_string(ErrorKind kind);

// Numerical failures map to CLI exit code 3; validation to 2.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace thenon
