#include "nrqb/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "nrqb/error.hpp"
#include "nrqb/spectrum.hpp"

namespace nrqb {

namespace {

constexpr cplx I{0.0, 1.0};

void require_modes(const MomentState& s, std::size_t n) {
    if (s.modes() != n || s.second.rows() != static_cast<Eigen::Index>(n) ||
        s.second.cols() != static_cast<Eigen::Index>(n)) {
        throw DimensionMismatch("moment state has " + std::to_string(s.modes()) +
                                " modes, expected " + std::to_string(n));
    }
}

Trajectory run(ModelKind kind, const std::function<MomentState(const MomentState&)>& deriv,
               const MomentState& initial, std::size_t modes, std::span<const double> grid,
               const IntegratorOptions& opts) {
    require_modes(initial, modes);
    if (!initial.satisfies_invariants()) {
        throw InvalidParameter("initial moment state violates Hermiticity/positivity");
    }
    ComplexRhs rhs = [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy = deriv(MomentState::unflatten(y, modes)).flatten();
    };
    StepProjector symmetrize = [modes](Eigen::VectorXcd& y) {
        const auto n = static_cast<Eigen::Index>(modes);
        Eigen::Map<Eigen::MatrixXcd> N(y.data() + n, n, n);
        const Eigen::MatrixXcd h = 0.5 * (N + N.adjoint());
        N = h;
    };
    const auto ys = integrate_ode(rhs, initial.flatten(), grid, opts, symmetrize);

    Trajectory traj;
    traj.model = kind;
    traj.times.assign(grid.begin(), grid.end());
    traj.states.reserve(ys.size());
    for (const auto& y : ys) traj.states.push_back(MomentState::unflatten(y, modes));
    return traj;
}

}  // namespace

MomentState linear_moment_rhs(const Eigen::MatrixXcd& W, const Eigen::VectorXcd& f,
                              const MomentState& s) {
    MomentState d;
    d.first = W * s.first + f;
    d.second = W.conjugate() * s.second + s.second * W.transpose() +
               f.conjugate() * s.first.transpose() + s.first.conjugate() * f.transpose();
    return d;
}

MomentState effective_rhs(const MomentState& s, const EffectiveParams& e) {
    require_modes(s, 2);
    const cplx ph = unit_phase(e.phi);
    const cplx half_gamma_fwd = (e.gamma_diss / 2.0) * ph;             // (Γ/2)e^{iφ}
    const cplx half_gamma_bwd = (e.gamma_diss / 2.0) * std::conj(ph);  // (Γ/2)e^{−iφ}

    const cplx a = s.first(0);
    const cplx b = s.first(1);
    const cplx n_aa = s.second(0, 0);
    const cplx n_bb = s.second(1, 1);
    const cplx n_ab = s.second(0, 1);   // ⟨a†b⟩
    const cplx n_ba = std::conj(n_ab);  // ⟨ab†⟩

    MomentState d = MomentState::vacuum(2);
    d.first(0) = (-I * e.delta_a_p - e.lambda_a / 2.0) * a +
                 (-I * e.j_minus - half_gamma_bwd) * b - I * e.epsilon;
    d.first(1) = (-I * e.delta_b_p - e.lambda_b / 2.0) * b + (-I * e.j_plus - half_gamma_fwd) * a;

    d.second(0, 0) = -e.lambda_a * n_aa - I * e.j_minus * n_ab + I * e.j_plus * n_ba -
                     half_gamma_fwd * n_ba - half_gamma_bwd * n_ab - 2.0 * e.epsilon * a.imag();
    d.second(1, 1) = -e.lambda_b * n_bb + I * e.j_minus * n_ab - I * e.j_plus * n_ba -
                     half_gamma_fwd * n_ba - half_gamma_bwd * n_ab;
    d.second(0, 1) =
        (I * (e.delta_a_p - e.delta_b_p) - (e.lambda_a + e.lambda_b) / 2.0) * n_ab +
        I * e.epsilon * b + (-I * e.j_plus - half_gamma_fwd) * n_aa +
        (I * e.j_plus - half_gamma_fwd) * n_bb;
    d.second(1, 0) = std::conj(d.second(0, 1));
    return d;
}

Eigen::Matrix3cd full_drift(const SystemParams& p) {
    const cplx ph = unit_phase(p.phi);
    Eigen::Matrix3cd W;
    W << -I * p.delta_a - p.kappa_a / 2.0, -I * p.J, -I * p.g_a * std::conj(ph),
        -I * p.J, -I * p.delta_b - p.kappa_b / 2.0, -I * p.g_b,
        -I * p.g_a * ph, -I * p.g_b, -I * p.delta_c - p.gamma_m / 2.0;
    return W;
}

Eigen::Vector3cd full_drive(const SystemParams& p) {
    return {-I * p.epsilon, cplx(0.0, 0.0), cplx(0.0, 0.0)};
}

MomentState full_rhs(const MomentState& s, const SystemParams& p) {
    require_modes(s, 3);
    return linear_moment_rhs(full_drift(p), full_drive(p), s);
}

Trajectory integrate(const EffectiveParams& e, const MomentState& initial,
                     std::span<const double> grid, const IntegratorOptions& opts) {
    Trajectory t = run(
        ModelKind::Effective, [&e](const MomentState& s) { return effective_rhs(s, e); },
        initial, 2, grid, opts);
    fill_observables(t, e.omega_a, e.omega_b);
    return t;
}

Trajectory integrate(const SystemParams& raw, const MomentState& initial,
                     std::span<const double> grid, const IntegratorOptions& opts) {
    const SystemParams p = validated(raw);
    const Eigen::MatrixXcd W = full_drift(p);
    const Eigen::VectorXcd f = full_drive(p);
    Trajectory t = run(
        ModelKind::Full, [&](const MomentState& s) { return linear_moment_rhs(W, f, s); },
        initial, 3, grid, opts);
    fill_observables(t, p.omega_a, p.omega_b);
    return t;
}

double efficiency(double e_a, double e_b) {
    const double total = e_a + e_b;
    return std::abs(total) < 1e-30 ? 0.0 : e_b / total;
}

std::vector<double> finite_difference(std::span<const double> t, std::span<const double> y) {
    const std::size_t n = t.size();
    if (y.size() != n) throw DimensionMismatch("finite_difference: length mismatch");
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d.front() = (y[1] - y[0]) / (t[1] - t[0]);
    d.back() = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double hm = t[k] - t[k - 1];
        const double hp = t[k + 1] - t[k];
        d[k] = (hm * hm * y[k + 1] + (hp * hp - hm * hm) * y[k] - hp * hp * y[k - 1]) /
               (hm * hp * (hm + hp));
    }
    return d;
}

void fill_observables(Trajectory& traj, double omega_a, double omega_b) {
    const std::size_t n = traj.states.size();
    traj.e_a.resize(n);
    traj.e_b.resize(n);
    traj.eta.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        traj.e_a[k] = omega_a * traj.states[k].second(0, 0).real();
        traj.e_b[k] = omega_b * traj.states[k].second(1, 1).real();
        traj.eta[k] = efficiency(traj.e_a[k], traj.e_b[k]);
    }
    traj.power = finite_difference(traj.times, traj.e_b);
}

SteadyState steady_state(const EffectiveParams& e) {
    const DriftMatrix dm = drift_matrix(e);
    const SpectralReport rep = spectral(dm);
    const double growth = std::max(rep.lambda_plus.real(), rep.lambda_minus.real());
    if (growth >= -1e-12) {
        throw UnstableSystem("drift matrix has an eigenvalue with Re λ = " + std::to_string(growth) +
                             " >= 0; no steady state");
    }
    const Eigen::Vector2cd v = dm.m.partialPivLu().solve(-dm.drive);
    SteadyState s;
    s.amp_a = v(0);
    s.amp_b = v(1);
    s.e_a = e.omega_a * std::norm(v(0));
    s.e_b = e.omega_b * std::norm(v(1));
    s.eta = efficiency(s.e_a, s.e_b);
    return s;
}

Eigen::Vector3cd full_steady_amplitudes(const SystemParams& raw) {
    const SystemParams p = validated(raw);
    const Eigen::Matrix3cd W = full_drift(p);
    const Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(W, false);
    const double growth = es.eigenvalues().real().maxCoeff();
    if (growth >= -1e-12) {
        throw UnstableSystem("three-mode drift has an eigenvalue with Re λ = " +
                             std::to_string(growth) + " >= 0; no steady state");
    }
    return W.partialPivLu().solve(-full_drive(p));
}

SteadyState full_steady_state(const SystemParams& raw) {
    const SystemParams p = validated(raw);
    const Eigen::Vector3cd v = full_steady_amplitudes(p);
    SteadyState s;
    s.amp_a = v(0);
    s.amp_b = v(1);
    s.e_a = p.omega_a * std::norm(v(0));
    s.e_b = p.omega_b * std::norm(v(1));
    s.eta = efficiency(s.e_a, s.e_b);
    return s;
}

}  // namespace nrqb
