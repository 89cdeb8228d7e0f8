#pragma once
#include <stdexcept>
#include <string>

namespace pxp {

// Domain error hierarchy. Each maps to a machine-readable code used by the
// CLI when emitting error JSON (exit 2 = validation, exit 3 = numerical).
struct Error : std::runtime_error {
    std::string code;
    Error(std::string c, const std::string& msg)
        : std::runtime_error(msg), code(std::move(c)) {}
};

// Numerical failures (CLI exit 3)
struct SingularCell : Error {
    explicit SingularCell(const std::string& msg) : Error("SingularCell", msg) {}
};
struct NoReturnFound : Error {
    explicit NoReturnFound(const std::string& msg) : Error("NoReturnFound", msg) {}
};
struct SingularPoint : Error {
    explicit SingularPoint(const std::string& msg) : Error("SingularPoint", msg) {}
};
struct IncommensurateStep : Error {
    explicit IncommensurateStep(const std::string& msg) : Error("IncommensurateStep", msg) {}
};
struct EigFailure : Error {
    explicit EigFailure(const std::string& msg) : Error("EigFailure", msg) {}
};
struct SVDFailure : Error {
    explicit SVDFailure(const std::string& msg) : Error("SVDFailure", msg) {}
};
struct ConvergenceFailure : Error {
    explicit ConvergenceFailure(const std::string& msg) : Error("ConvergenceFailure", msg) {}
};
struct EnvelopeTooSmall : Error {
    explicit EnvelopeTooSmall(const std::string& msg) : Error("EnvelopeTooSmall", msg) {}
};
struct InsufficientPeaks : Error {
    explicit InsufficientPeaks(const std::string& msg) : Error("InsufficientPeaks", msg) {}
};

// Validation failures (CLI exit 2)
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error("DimensionMismatch", msg) {}
};
struct TooLarge : Error {
    explicit TooLarge(const std::string& msg) : Error("TooLarge", msg) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error("DomainError", msg) {}
};
struct MissingInput : Error {
    explicit MissingInput(const std::string& msg) : Error("MissingInput", msg) {}
};

} // namespace pxp
