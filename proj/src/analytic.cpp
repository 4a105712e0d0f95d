#include "nrqb/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nrqb/dynamics.hpp"
#include "nrqb/error.hpp"

namespace nrqb {

namespace {

constexpr double kRegimeTol = 1e-10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// A-coefficient terms go like 1/(Λ_a − Λ_b)²; inside this band the factorized
// form N = conj(⟨x⟩)⟨x⟩ᵀ (exact for a coherent start) is better conditioned.
constexpr double kConditioningBand = 1e-3;

bool near_equal_rates(double la, double lb) {
    return std::abs(la - lb) < kConditioningBand * std::max(la, lb);
}

/// e^{−αt} − e^{−βt} without cancellation.
double exp_diff(double alpha, double beta, double t) {
    return std::exp(-beta * t) * std::expm1(-(alpha - beta) * t);
}

/// 1 − e^{−αt}.
double one_minus_exp(double alpha, double t) { return -std::expm1(-alpha * t); }

double detuning_residual(const EffectiveParams& e) {
    return std::max(std::abs(e.delta_a_p), std::abs(e.delta_b_p));
}

/// X(t) with ⟨b⟩ = (4iεΓe^{iφ}/Λ_a)·X.
struct BatteryShape {
    double x;
    double dx;  // dX/dt
};

BatteryShape battery_shape(double t, double la, double lb, const DegenerateFlags& deg) {
    const double eb = std::exp(-lb * t / 2.0);
    BatteryShape s{};
    if (deg.equal_rates) {
        const double lbar = 0.5 * (la + lb);
        const double em = std::exp(-lbar * t / 2.0);
        s.x = one_minus_exp(lb / 2.0, t) / lb - 0.5 * t * em;
        s.dx = 0.5 * eb - 0.5 * em + 0.25 * lbar * t * em;
    } else {
        const double ea = std::exp(-la * t / 2.0);
        s.x = one_minus_exp(lb / 2.0, t) / lb + exp_diff(la / 2.0, lb / 2.0, t) / (la - lb);
        s.dx = 0.5 * eb + (-0.5 * la * ea + 0.5 * lb * eb) / (la - lb);
    }
    return s;
}

void require_positive_rates(const EffectiveParams& e) {
    if (!(e.lambda_a > 0.0) || !(e.lambda_b > 0.0)) {
        throw NonpositiveRate("closed forms need Λ_a > 0 and Λ_b > 0");
    }
}

}  // namespace

AnalyticCoefficients coefficients(double la, double lb) {
    if (!(la > 0.0) || !(lb > 0.0)) throw NonpositiveRate("Λ_a and Λ_b must be > 0");
    AnalyticCoefficients c;
    c.lambda_a = la;
    c.lambda_b = lb;
    const double scale = std::max(la, lb);
    c.degenerate.equal_rates = std::abs(la - lb) < kDegeneracyThreshold * scale;
    c.degenerate.half_rate = std::abs(lb - la / 2.0) < kDegeneracyThreshold * scale;

    c.a1 = 1.0 / (la + lb) + la / (lb * (la + lb));
    if (c.degenerate.equal_rates) {
        c.a2 = c.a3 = c.a4 = kNaN;
    } else {
        c.a2 = -2.0 / lb + la / (lb * (la - lb));
        c.a3 = -1.0 / (la - lb);
        c.a4 = -la / (lb * (la - lb));
    }
    return c;
}

bool in_closed_form_regime(const EffectiveParams& e) {
    return nonreciprocal_residual(e) <= kRegimeTol && detuning_residual(e) <= kRegimeTol;
}

void require_closed_form_regime(const EffectiveParams& e) {
    const double nr = nonreciprocal_residual(e);
    const double det = detuning_residual(e);
    if (nr > kRegimeTol || det > kRegimeTol) {
        throw ConditionsNotMet("closed forms need J₋ = i(Γ/2)e^{−iφ} and Δ′_a = Δ′_b = 0 "
                               "(nonreciprocal residual " + std::to_string(nr) +
                                   ", detuning " + std::to_string(det) + ")",
                               nr, det);
    }
}

ClosedFormMoments closed_form_moments(double t, const EffectiveParams& e) {
    require_closed_form_regime(e);
    require_positive_rates(e);
    const double la = e.lambda_a, lb = e.lambda_b;
    const double eps = e.epsilon, gam = e.gamma_diss;
    const AnalyticCoefficients c = coefficients(la, lb);
    const cplx i{0.0, 1.0};
    const cplx ph = unit_phase(e.phi);

    ClosedFormMoments m;
    const double rise_a = one_minus_exp(la / 2.0, t);
    m.amp_a = (-2.0 * i * eps / la) * rise_a;
    m.n_aa = 4.0 * eps * eps / (la * la) * rise_a * rise_a;

    const BatteryShape shape = battery_shape(t, la, lb, c.degenerate);
    m.amp_b = (4.0 * i * eps * gam * ph / la) * shape.x;

    const double nbb_pref = 16.0 * eps * eps * gam * gam / (la * la);
    const cplx nab_pref = -8.0 * eps * eps * gam * ph / (la * la);
    if (c.degenerate.equal_rates || near_equal_rates(la, lb)) {
        m.n_bb = nbb_pref * shape.x * shape.x;
        m.n_ab = nab_pref * rise_a * shape.x;
        return m;
    }

    const double sum = c.a1 + c.a2 + c.a3 + c.a4;
    const double mid = (la + lb) / 2.0;
    // A₂/(Λ_b − Λ_a/2) reduces exactly to 2/(Λ_b(Λ_a − Λ_b)).
    const double a2_term = c.degenerate.half_rate ? 2.0 / (lb * (la - lb))
                                                  : c.a2 / (lb - la / 2.0);
    const double bracket = c.a1 / lb * one_minus_exp(lb, t) +
                           a2_term * exp_diff(la / 2.0, lb, t) +
                           c.a3 / (lb - la) * exp_diff(la, lb, t) +
                           2.0 * c.a4 / lb * exp_diff(lb / 2.0, lb, t) -
                           2.0 * sum / (lb - la) * exp_diff(mid, lb, t);
    m.n_bb = nbb_pref * bracket;

    const double cross = c.a1 * one_minus_exp(mid, t) + c.a2 * exp_diff(la / 2.0, mid, t) +
                         c.a3 * exp_diff(la, mid, t) + c.a4 * exp_diff(lb / 2.0, mid, t);
    m.n_ab = nab_pref * cross;
    return m;
}

ChargerMoments charger_closed_form(double t, const EffectiveParams& e) {
    const double nr = nonreciprocal_residual(e);
    if (nr > kRegimeTol) {
        throw ConditionsNotMet("charger closed form needs the nonreciprocal condition", nr, 0.0);
    }
    if (!(e.lambda_a > 0.0)) throw NonpositiveRate("Λ_a must be > 0");
    const cplx i{0.0, 1.0};
    const double d = e.delta_a_p, la = e.lambda_a, eps = e.epsilon;
    const cplx rate = i * d + la / 2.0;
    ChargerMoments m;
    // −iε(1 − e^{−(iΔ′+Λ/2)t})/(iΔ′ + Λ/2)
    m.amp_a = -i * eps * (1.0 - std::exp(-rate * t)) / rate;
    const double decay = std::exp(-la * t / 2.0);
    m.n_aa = eps * eps / (d * d + la * la / 4.0) *
             (1.0 + decay * decay - 2.0 * decay * std::cos(d * t));
    return m;
}

SteadyEnergies steady_energies(const EffectiveParams& e) {
    SteadyEnergies s;
    if (in_closed_form_regime(e)) {
        require_positive_rates(e);
        const double la = e.lambda_a, lb = e.lambda_b;
        const double eps2 = e.epsilon * e.epsilon, g2 = e.gamma_diss * e.gamma_diss;
        s.e_a = 4.0 * e.omega_a * eps2 / (la * la);
        s.e_b = 16.0 * e.omega_b * eps2 * g2 / (la * la * lb * (la + lb)) +
                16.0 * e.omega_b * eps2 * g2 / (la * lb * lb * (la + lb));
        s.closed_form = true;
    } else {
        const SteadyState st = steady_state(e);
        s.e_a = st.e_a;
        s.e_b = st.e_b;
    }
    s.eta = efficiency(s.e_a, s.e_b);
    s.ratio = s.e_a > 0.0 ? s.e_b / s.e_a : 0.0;
    return s;
}

double power_analytic(double t, const EffectiveParams& e) {
    require_closed_form_regime(e);
    require_positive_rates(e);
    const double la = e.lambda_a, lb = e.lambda_b;
    const double pref = e.omega_b * 16.0 * e.epsilon * e.epsilon * e.gamma_diss * e.gamma_diss /
                        (la * la);
    const AnalyticCoefficients c = coefficients(la, lb);
    if (c.degenerate.equal_rates || near_equal_rates(la, lb)) {
        const BatteryShape s = battery_shape(t, la, lb, c.degenerate);
        return pref * 2.0 * s.x * s.dx;
    }
    // d/dt (e^{−αt} − e^{−βt}) = −αe^{−αt} + βe^{−βt}
    auto ddiff = [t](double alpha, double beta) {
        return -alpha * std::exp(-alpha * t) + beta * std::exp(-beta * t);
    };
    const double sum = c.a1 + c.a2 + c.a3 + c.a4;
    const double mid = (la + lb) / 2.0;
    const double a2_term = c.degenerate.half_rate ? 2.0 / (lb * (la - lb))
                                                  : c.a2 / (lb - la / 2.0);
    const double dbracket = c.a1 / lb * lb * std::exp(-lb * t) + a2_term * ddiff(la / 2.0, lb) +
                            c.a3 / (lb - la) * ddiff(la, lb) +
                            2.0 * c.a4 / lb * ddiff(lb / 2.0, lb) -
                            2.0 * sum / (lb - la) * ddiff(mid, lb);
    return pref * dbracket;
}

Trajectory closed_form_trajectory(const EffectiveParams& e, std::span<const double> grid) {
    Trajectory traj;
    traj.model = ModelKind::Effective;
    traj.times.assign(grid.begin(), grid.end());
    for (double t : grid) {
        const ClosedFormMoments m = closed_form_moments(t, e);
        MomentState s = MomentState::vacuum(2);
        s.first << m.amp_a, m.amp_b;
        s.second << m.n_aa, m.n_ab, std::conj(m.n_ab), m.n_bb;
        traj.states.push_back(std::move(s));
    }
    fill_observables(traj, e.omega_a, e.omega_b);
    for (std::size_t k = 0; k < grid.size(); ++k) traj.power[k] = power_analytic(grid[k], e);
    return traj;
}

double detuned_energy_ratio(const EffectiveParams& e) {
    const double nr = nonreciprocal_residual(e);
    if (nr > kRegimeTol || std::abs(e.delta_a_p) > kRegimeTol) {
        throw ConditionsNotMet("detuned ratio needs the nonreciprocal condition and Δ′_a = 0", nr,
                               std::abs(e.delta_a_p));
    }
    const double d = e.delta_b_p;
    return (e.omega_b / e.omega_a) * e.gamma_diss * e.gamma_diss /
           (d * d + e.lambda_b * e.lambda_b / 4.0);
}

}  // namespace nrqb
