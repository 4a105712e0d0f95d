#include "nrqb/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nrqb/error.hpp"

namespace nrqb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidParameter(what);
}

}  // namespace

double wrap_phase(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

cplx unit_phase(double phi) {
    const double w = wrap_phase(phi);
    const double quarter = std::numbers::pi / 2.0;
    const double k = std::round(w / quarter);
    if (std::abs(w - k * quarter) < 4.0 * std::numeric_limits<double>::epsilon()) {
        switch (static_cast<int>(k) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    return {std::cos(w), std::sin(w)};
}

SystemParams validated(SystemParams p) {
    const double fields[] = {p.delta_a, p.delta_b, p.delta_c, p.g_a,     p.g_b,
                             p.J,       p.phi,     p.epsilon, p.kappa_a, p.kappa_b,
                             p.gamma_m, p.omega_a, p.omega_b};
    for (double v : fields) require(std::isfinite(v), "parameters must be finite");
    require(p.kappa_a >= 0.0, "kappa_a must be >= 0");
    require(p.kappa_b >= 0.0, "kappa_b must be >= 0");
    require(p.gamma_m > 0.0, "gamma_m must be > 0");
    require(p.g_a >= 0.0, "g_a must be >= 0");
    require(p.g_b >= 0.0, "g_b must be >= 0");
    require(p.epsilon >= 0.0, "epsilon must be >= 0");
    p.phi = wrap_phase(p.phi);
    return p;
}

EffectiveParams reduce_to_effective(const SystemParams& raw) {
    const SystemParams p = validated(raw);
    const double gamma = p.gamma_m / 2.0;
    const double denom = p.delta_c * p.delta_c + gamma * gamma;

    EffectiveParams e;
    e.delta_a_p = p.delta_a - p.g_a * p.g_a * p.delta_c / denom;
    e.delta_b_p = p.delta_b - p.g_b * p.g_b * p.delta_c / denom;
    e.gamma_a_eff = p.g_a * p.g_a * gamma / denom;
    e.gamma_b_eff = p.g_b * p.g_b * gamma / denom;
    e.g_coh = p.g_a * p.g_b * p.delta_c / denom;
    e.gamma_diss = gamma * p.g_a * p.g_b / denom;
    e.lambda_a = e.gamma_a_eff + p.kappa_a;
    e.lambda_b = e.gamma_b_eff + p.kappa_b;
    e.epsilon = p.epsilon;
    e.omega_a = p.omega_a;
    e.omega_b = p.omega_b;
    return with_coupling(e, p.J, p.phi);
}

EffectiveParams with_coupling(EffectiveParams e, double J, double phi) {
    e.J = J;
    e.phi = wrap_phase(phi);
    const cplx ph = unit_phase(e.phi);
    e.j_plus = J - e.g_coh * ph;
    e.j_minus = J - e.g_coh * std::conj(ph);
    return e;
}

EffectiveParams with_local_decay(EffectiveParams e, double kappa_a, double kappa_b) {
    if (kappa_a < 0.0 || kappa_b < 0.0) throw InvalidParameter("local decay rates must be >= 0");
    e.lambda_a = e.gamma_a_eff + kappa_a;
    e.lambda_b = e.gamma_b_eff + kappa_b;
    return e;
}

RegimeReport validate_adiabatic(const SystemParams& p, double decay_threshold,
                                double coupling_threshold) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    RegimeReport r;
    r.decay_threshold = decay_threshold;
    r.coupling_threshold = coupling_threshold;

    const double kmax = std::max(p.kappa_a, p.kappa_b);
    r.decay_margin = kmax > 0.0 ? p.gamma_m / kmax : inf;
    r.decay_ok = r.decay_margin >= decay_threshold;

    const double gmax = std::max(p.g_a, p.g_b);
    const double scale = std::abs(cplx(p.delta_c, -p.gamma_m / 2.0));
    r.coupling_margin = gmax > 0.0 ? scale / gmax : inf;
    r.coupling_ok = r.coupling_margin >= coupling_threshold;
    return r;
}

CouplingAmplitudes coupling_amplitudes(const EffectiveParams& e) {
    const cplx i{0.0, 1.0};
    const cplx ph = unit_phase(e.phi);
    CouplingAmplitudes c;
    c.backward = -i * e.j_minus - (e.gamma_diss / 2.0) * std::conj(ph);
    c.forward = -i * e.j_plus - (e.gamma_diss / 2.0) * ph;
    const double fwd = std::abs(c.forward);
    const double bwd = std::abs(c.backward);
    if (fwd > 0.0) {
        c.isolation_ratio = bwd / fwd;
    } else {
        c.isolation_ratio = bwd > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    return c;
}

double nonreciprocal_residual(const EffectiveParams& e) {
    const cplx target = cplx(0.0, e.gamma_diss / 2.0) * std::conj(unit_phase(e.phi));
    return std::abs(e.j_minus - target);
}

NonreciprocalSolution solve_nonreciprocal(const EffectiveParams& e,
                                          std::optional<double> pinned_phi) {
    if (!(e.gamma_diss > 0.0)) {
        throw InvalidParameter("nonreciprocity requires a positive dissipative coupling");
    }
    const double G = e.g_coh;
    const double half = e.gamma_diss / 2.0;

    NonreciprocalSolution s{};
    if (!pinned_phi) {
        // J real ⇔ tan φ = Γ/(2G); the root in (0, π) gives J = √(G² + Γ²/4) > 0.
        s.phi = wrap_phase(std::atan2(half, G));
    } else {
        s.phi = wrap_phase(*pinned_phi);
    }
    // J = (G + iΓ/2) e^{−iφ}; its imaginary part must vanish.
    const cplx ph = unit_phase(s.phi);
    const cplx j = cplx(G, half) * std::conj(ph);
    s.J = j.real();
    s.residual = std::abs(j.imag());
    const double tol = 1e-12 * std::max(1.0, std::abs(G) + half);
    if (s.residual > tol) {
        throw IncompatiblePhase("pinned phase admits no real J (residual " +
                                    std::to_string(s.residual) + ")",
                                s.residual);
    }
    return s;
}

SystemParams rate_matched_three_mode(const SystemParams& raw) {
    SystemParams p = validated(raw);
    const double gamma = p.gamma_m / 2.0;
    const double dc2 = p.delta_c * p.delta_c;
    const double scale = std::sqrt((4.0 * dc2 + gamma * gamma) / (2.0 * (dc2 + gamma * gamma)));
    p.delta_c *= 2.0;
    p.g_a *= scale;
    p.g_b *= scale;
    return p;
}

}  // namespace nrqb
