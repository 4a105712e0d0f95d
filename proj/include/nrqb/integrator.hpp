// integrator.hpp — explicit Runge–Kutta integration of complex linear ODE
// systems with dense output onto a requested sample grid.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nrqb {

enum class StepMethod {
    DormandPrince45,  // adaptive embedded 5(4) pair, dense output
    ClassicalRk4,     // fixed step, steps land on every sample time
};

struct IntegratorOptions {
    StepMethod method = StepMethod::DormandPrince45;
    double rtol = 1e-9;
    double atol = 1e-12;
    double min_step = 1e-12;
    double max_step = 0.0;      // 0 → unbounded
    double initial_step = 0.0;  // 0 → automatic
    double fixed_step = 1e-2;   // ClassicalRk4 only
    std::size_t max_steps = 50'000'000;
};

struct IntegratorStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

using ComplexRhs = std::function<void(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dydt)>;
/// Applied to the state after every accepted step (e.g. re-symmetrization).
using StepProjector = std::function<void(Eigen::VectorXcd& y)>;

/// Integrates from t = 0 and returns the state at each time in `grid`
/// (ascending, starting at ≥ 0). Throws StepSizeUnderflow.
std::vector<Eigen::VectorXcd> integrate_ode(const ComplexRhs& rhs, const Eigen::VectorXcd& y0,
                                            std::span<const double> grid,
                                            const IntegratorOptions& opts,
                                            const StepProjector& projector = {},
                                            IntegratorStats* stats = nullptr);

/// `samples` equally spaced points on [0, t_end], both ends included.
std::vector<double> uniform_grid(double t_end, std::size_t samples);

}  // namespace nrqb
