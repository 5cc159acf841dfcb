#pragma once

#include <stdexcept>
#include <string>

namespace conehit {

/// Base class for all errors raised by the library. The `code()` string is
/// stable and machine-readable; it ends up in CLI error reports.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct NotPositiveDefinite : Error {
    explicit NotPositiveDefinite(const std::string& msg)
        : Error("NOT_POSITIVE_DEFINITE", msg) {}
};

struct InfeasibleSign : Error {
    explicit InfeasibleSign(const std::string& msg)
        : Error("INFEASIBLE_SIGN", msg) {}
};

struct NumericalAmbiguity : Error {
    explicit NumericalAmbiguity(const std::string& msg)
        : Error("NUMERICAL_AMBIGUITY", msg) {}
};

struct CoverageGap : Error {
    explicit CoverageGap(const std::string& msg)
        : Error("COVERAGE_GAP", msg) {}
};

struct CovNotPD : Error {
    explicit CovNotPD(const std::string& msg) : Error("COV_NOT_PD", msg) {}
};

struct Overflow : Error {
    explicit Overflow(const std::string& msg) : Error("OVERFLOW", msg) {}
};

struct InvalidGrid : Error {
    explicit InvalidGrid(const std::string& msg) : Error("INVALID_GRID", msg) {}
};

struct NonConvergent : Error {
    explicit NonConvergent(const std::string& msg)
        : Error("NON_CONVERGENT", msg) {}
};

struct QuadratureNotConverged : Error {
    explicit QuadratureNotConverged(const std::string& msg)
        : Error("QUADRATURE_NOT_CONVERGED", msg) {}
};

struct OutOfScope2D : Error {
    explicit OutOfScope2D(const std::string& msg)
        : Error("OUT_OF_SCOPE_2D", msg) {}
};

struct OutOfScopeIndependent : Error {
    explicit OutOfScopeIndependent(const std::string& msg)
        : Error("OUT_OF_SCOPE_INDEPENDENT", msg) {}
};

struct OutOfScopeNegAssoc : Error {
    explicit OutOfScopeNegAssoc(const std::string& msg)
        : Error("OUT_OF_SCOPE_NEGASSOC", msg) {}
};

struct InvalidConfig : Error {
    explicit InvalidConfig(const std::string& msg)
        : Error("INVALID_CONFIG", msg) {}
};

struct EffectiveSampleTooSmall : Error {
    explicit EffectiveSampleTooSmall(const std::string& msg)
        : Error("EFFECTIVE_SAMPLE_TOO_SMALL", msg) {}
};

struct TooFewHits : Error {
    explicit TooFewHits(const std::string& msg) : Error("TOO_FEW_HITS", msg) {}
};

struct ConfigError : Error {
    ConfigError(std::string code, const std::string& msg)
        : Error(std::move(code), msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("IO_ERROR", msg) {}
};

} // namespace conehit
