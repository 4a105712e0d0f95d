// analytic.hpp — closed-form moments, energies and charging power in the
// nonreciprocal resonant regime.
#pragma once

#include <span>

#include "nrqb/dynamics.hpp"
#include "nrqb/model.hpp"

namespace nrqb {

struct DegenerateFlags {
    bool equal_rates = false;  // |Λ_a − Λ_b| below threshold
    bool half_rate = false;    // |Λ_b − Λ_a/2| below threshold
};

/// A₁–A₄. Coefficients that diverge in a degenerate limit are NaN; the moment
/// functions below switch to the limit expressions instead.
struct AnalyticCoefficients {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    DegenerateFlags degenerate;
};

inline constexpr double kDegeneracyThreshold = 1e-6;

/// Throws NonpositiveRate.
AnalyticCoefficients coefficients(double lambda_a, double lambda_b);

struct ClosedFormMoments {
    cplx amp_a;
    cplx amp_b;
    double n_aa = 0.0;
    double n_bb = 0.0;
    cplx n_ab;  // ⟨a†b⟩
};

/// Throws ConditionsNotMet unless J₋ = i(Γ/2)e^{−iφ} and Δ′_a = Δ′_b = 0
/// (each to 1e-10).
void require_closed_form_regime(const EffectiveParams& e);
bool in_closed_form_regime(const EffectiveParams& e);

ClosedFormMoments closed_form_moments(double t, const EffectiveParams& e);

struct ChargerMoments {
    cplx amp_a;
    double n_aa = 0.0;
};

/// Charger-only solution, valid for any Δ′_a once the backward coupling
/// vanishes.
ChargerMoments charger_closed_form(double t, const EffectiveParams& e);

struct SteadyEnergies {
    double e_a = 0.0;
    double e_b = 0.0;
    double eta = 0.0;
    double ratio = 0.0;  // E_B / E_A
    bool closed_form = false;
};

/// Long-time energies. Uses the closed form in the nonreciprocal resonant
/// regime and the linear steady state otherwise.
SteadyEnergies steady_energies(const EffectiveParams& e);

/// Exact dE_B/dt from the closed-form battery population.
double power_analytic(double t, const EffectiveParams& e);

/// Trajectory assembled from the closed forms; power is the exact derivative.
Trajectory closed_form_trajectory(const EffectiveParams& e, std::span<const double> grid);

/// E_B(∞)/E_A(∞) = Γ²/(Δ² + Λ_b²/4) for a resonant charger (Δ′_a = 0), φ = π/2
/// and the nonreciprocal coupling, with battery detuning Δ = Δ′_b. Derived from
/// the stationary moment equations; not one of the printed closed forms.
double detuned_energy_ratio(const EffectiveParams& e);

}  // namespace nrqb
