#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ark {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A pivot of a tridiagonal elimination (or the periodic capacitance
// matrix) fell below the singularity guard.
class SingularOperator : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

// Dense Sylvester solve failed its a-posteriori residual check, which
// happens when the spectra of A1 and -A2 (nearly) intersect.
class SpectralOverlap : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    using Error::Error;
};

class MissingStage : public Error {
public:
    using Error::Error;
};

class NonPositiveDiffusion : public Error {
public:
    using Error::Error;
};

class NewtonDivergence : public Error {
public:
    NewtonDivergence(const std::string& what, std::vector<double> residual_history)
        : Error(what), history_(std::move(residual_history)) {}

    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

} // namespace ark
