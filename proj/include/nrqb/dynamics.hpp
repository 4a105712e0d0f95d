// dynamics.hpp — first/second moment equations of motion for the effective
// two-mode model and the full three-mode model, trajectories and observables.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "nrqb/integrator.hpp"
#include "nrqb/model.hpp"
#include "nrqb/moments.hpp"

namespace nrqb {

enum class ModelKind { Effective, Full };

struct Trajectory {
    ModelKind model = ModelKind::Effective;
    std::vector<double> times;
    std::vector<MomentState> states;
    std::vector<double> e_a;
    std::vector<double> e_b;
    std::vector<double> eta;
    std::vector<double> power;

    std::size_t size() const { return times.size(); }
};

/// Effective two-mode moment equations (general Γ_a ≠ Γ_b form).
MomentState effective_rhs(const MomentState& s, const EffectiveParams& e);

/// Three-mode (a, b, c) moment equations with c damped at γ_m.
MomentState full_rhs(const MomentState& s, const SystemParams& p);

/// Drift matrix W and drive f of the literal three-mode first-moment equations.
Eigen::Matrix3cd full_drift(const SystemParams& p);
Eigen::Vector3cd full_drive(const SystemParams& p);

/// Generic linear rule: d⟨x⟩ = W⟨x⟩ + f, dN = conj(W)N + NWᵀ + conj(f)⟨x⟩ᵀ + conj(⟨x⟩)fᵀ.
MomentState linear_moment_rhs(const Eigen::MatrixXcd& W, const Eigen::VectorXcd& f,
                              const MomentState& s);

Trajectory integrate(const EffectiveParams& e, const MomentState& initial,
                     std::span<const double> grid, const IntegratorOptions& opts = {});
Trajectory integrate(const SystemParams& p, const MomentState& initial,
                     std::span<const double> grid, const IntegratorOptions& opts = {});

/// Fills E_A = ω_a N_aa, E_B = ω_b N_bb, η and P = dE_B/dt (finite differences).
void fill_observables(Trajectory& traj, double omega_a, double omega_b);

/// Second-order finite-difference derivative on a possibly non-uniform grid,
/// first-order one-sided at the ends.
std::vector<double> finite_difference(std::span<const double> t, std::span<const double> y);

/// η = E_B/(E_A + E_B), 0 below 1e-30 total energy.
double efficiency(double e_a, double e_b);

struct SteadyState {
    cplx amp_a;
    cplx amp_b;
    double e_a;
    double e_b;
    double eta;
};

/// Stationary first moments of the effective model. Throws UnstableSystem.
SteadyState steady_state(const EffectiveParams& e);

/// Stationary amplitudes (a, b, c) of the literal three-mode model.
Eigen::Vector3cd full_steady_amplitudes(const SystemParams& p);
SteadyState full_steady_state(const SystemParams& p);

}  // namespace nrqb
