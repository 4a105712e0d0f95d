// spectrum.hpp — non-Hermitian spectral analysis of the 2×2 drift matrix and
// exceptional-point solving.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nrqb/model.hpp"

namespace nrqb {

/// d/dt (⟨a⟩, ⟨b⟩)ᵀ = m (⟨a⟩, ⟨b⟩)ᵀ + drive.
struct DriftMatrix {
    Eigen::Matrix2cd m;
    Eigen::Vector2cd drive;

    cplx A() const { return m(0, 0); }
    cplx B() const { return m(0, 1); }
    cplx C() const { return m(1, 0); }
    cplx D() const { return m(1, 1); }
};

DriftMatrix drift_matrix(const EffectiveParams& e);

struct SpectralReport {
    cplx lambda_plus;
    cplx lambda_minus;
    double eigvec_overlap = 0.0;  // |⟨v₊, v₋⟩| for unit eigenvectors
    cplx discriminant;            // (A − D)² + 4BC
    bool is_ep = false;
};

/// Eigen-analysis from the characteristic polynomial. The EP test is scale
/// relative: |discriminant| ≤ tol·‖m‖²_F with a non-scalar matrix.
SpectralReport spectral(const DriftMatrix& dm, double tol = 1e-8);

enum class EpVariable { J, Phi, DeltaB, Ratio };

std::string_view to_string(EpVariable v);
EpVariable ep_variable_from_string(std::string_view name);

/// Sets one free variable on a copy of `e`. Ratio is r = κ_b/κ_a with κ_a kept.
EffectiveParams apply_ep_variable(EffectiveParams e, EpVariable var, double value);
double read_ep_variable(const EffectiveParams& e, EpVariable var);

struct EpSolution {
    std::vector<std::pair<EpVariable, double>> values;
    double residual = 0.0;  // |discriminant| at the solution
    double overlap = 0.0;
    bool closed_form = false;
    EffectiveParams params;
};

struct EpOptions {
    double tol = 1e-12;
    int max_iterations = 100;
    bool force_newton = false;
};

/// Real parameter values zeroing the complex discriminant. One free variable:
/// closed form J_EP = ½√(Γ² − Δ² + δΛ²/4) when G = 0, φ = π/2 and Δ·δΛ = 0,
/// Gauss–Newton otherwise. Two free variables: Newton on (Re, Im).
/// Throws NoRealSolution or NonConvergence.
std::vector<EpSolution> solve_ep(const EffectiveParams& e, std::span<const EpVariable> free,
                                 const EpOptions& opts = {});

}  // namespace nrqb
