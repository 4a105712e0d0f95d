// model.hpp — physical parameters of the charger/battery/bad-cavity system
// and their reduction to the effective two-mode description.
#pragma once

#include <complex>
#include <optional>

namespace nrqb {

using cplx = std::complex<double>;

/// Three-mode parameters. All rates and frequencies are in units of the
/// mode frequency ω; detunings are relative to the drive frequency.
struct SystemParams {
    double delta_a = 0.0;
    double delta_b = 0.0;
    double delta_c = 0.0;
    double g_a = 0.0;
    double g_b = 0.0;
    double J = 0.0;
    double phi = 0.0;
    double epsilon = 0.0;
    double kappa_a = 0.0;
    double kappa_b = 0.0;
    double gamma_m = 1.0;
    double omega_a = 1.0;
    double omega_b = 1.0;
};

/// Checks the physical invariants and returns a copy with phi in [0, 2π).
/// Throws InvalidParameter.
SystemParams validated(SystemParams p);

/// Reduce `phi` into [0, 2π).
double wrap_phase(double phi);

/// e^{iφ}, exact at multiples of π/2 so that nonreciprocal couplings cancel
/// to the last bit.
cplx unit_phase(double phi);

struct EffectiveParams {
    double delta_a_p = 0.0;
    double delta_b_p = 0.0;
    double gamma_a_eff = 0.0;
    double gamma_b_eff = 0.0;
    double g_coh = 0.0;       // G
    double gamma_diss = 0.0;  // Γ
    double J = 0.0;
    cplx j_plus{0.0, 0.0};
    cplx j_minus{0.0, 0.0};
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    double phi = 0.0;
    double epsilon = 0.0;
    double omega_a = 1.0;
    double omega_b = 1.0;

    double kappa_a() const { return lambda_a - gamma_a_eff; }
    double kappa_b() const { return lambda_b - gamma_b_eff; }
};

/// Projection-operator elimination of the lossy cavity, with γ = γ_m/2.
EffectiveParams reduce_to_effective(const SystemParams& p);

/// Copy of `e` with the direct coupling and phase replaced; J± recomputed.
EffectiveParams with_coupling(EffectiveParams e, double J, double phi);

/// Copy of `e` with new local decay rates; Λ recomputed.
EffectiveParams with_local_decay(EffectiveParams e, double kappa_a, double kappa_b);

struct RegimeReport {
    bool decay_ok = true;
    double decay_margin = 0.0;     // γ_m / max(κ_a, κ_b)
    bool coupling_ok = true;
    double coupling_margin = 0.0;  // |Δ_c − iγ_m/2| / max(g_a, g_b)
    double decay_threshold = 10.0;
    double coupling_threshold = 10.0;

    bool ok() const { return decay_ok && coupling_ok; }
};

/// Advisory check of the adiabatic-elimination regime. Never throws.
RegimeReport validate_adiabatic(const SystemParams& p, double decay_threshold = 10.0,
                                double coupling_threshold = 10.0);

struct CouplingAmplitudes {
    cplx forward;   // a → b, coefficient of ⟨a⟩ in d⟨b⟩/dt
    cplx backward;  // b → a, coefficient of ⟨b⟩ in d⟨a⟩/dt
    double isolation_ratio;  // |backward| / |forward|
};

CouplingAmplitudes coupling_amplitudes(const EffectiveParams& e);

struct NonreciprocalSolution {
    double J;
    double phi;
    double residual;  // |J₋ − i(Γ/2)e^{−iφ}|
};

/// Solves J₋ = i(Γ/2)e^{−iφ} for real J. With `pinned_phi` the phase is kept
/// and only compatibility is checked (IncompatiblePhase otherwise).
NonreciprocalSolution solve_nonreciprocal(const EffectiveParams& e,
                                          std::optional<double> pinned_phi = std::nullopt);

/// |J₋ − i(Γ/2)e^{−iφ}| for the couplings stored in `e`.
double nonreciprocal_residual(const EffectiveParams& e);

/// Three-mode system whose literal moment equations eliminate to exactly the
/// effective moment equations of reduce_to_effective(p). The printed effective
/// equations damp amplitudes at Γ_a/2 and couple dissipatively at Γ/2, half of
/// what eliminating c from the literal equations gives, so Δ_c is doubled and
/// the c couplings rescaled: g → g·√((4Δ_c² + γ²) / (2(Δ_c² + γ²))).
SystemParams rate_matched_three_mode(const SystemParams& p);

}  // namespace nrqb
