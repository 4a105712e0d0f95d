#pragma once

#include <stdexcept>
#include <string>

namespace nrqb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A pinned phase admits no real direct coupling J satisfying the
/// nonreciprocity condition.
class IncompatiblePhase : public Error {
public:
    IncompatiblePhase(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class StepSizeUnderflow : public Error {
public:
    StepSizeUnderflow(const std::string& what, double t_reached)
        : Error(what), t_reached_(t_reached) {}
    double t_reached() const noexcept { return t_reached_; }

private:
    double t_reached_;
};

class UnstableSystem : public Error {
public:
    using Error::Error;
};

class NonpositiveRate : public Error {
public:
    using Error::Error;
};

/// The closed-form branch requires the nonreciprocal, resonant regime.
class ConditionsNotMet : public Error {
public:
    ConditionsNotMet(const std::string& what, double nonreciprocal_residual,
                     double detuning_residual)
        : Error(what),
          nonreciprocal_residual_(nonreciprocal_residual),
          detuning_residual_(detuning_residual) {}
    double nonreciprocal_residual() const noexcept { return nonreciprocal_residual_; }
    double detuning_residual() const noexcept { return detuning_residual_; }

private:
    double nonreciprocal_residual_;
    double detuning_residual_;
};

class NoRealSolution : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace nrqb
