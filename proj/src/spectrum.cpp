#include "nrqb/spectrum.hpp"

#include <algorithm>
#include <limits>
#include <cstdio>
#include <array>
#include <cmath>
#include <numbers>

#include "nrqb/error.hpp"

namespace nrqb {

DriftMatrix drift_matrix(const EffectiveParams& e) {
    const cplx i{0.0, 1.0};
    const cplx ph = unit_phase(e.phi);
    DriftMatrix dm;
    dm.m(0, 0) = -i * e.delta_a_p - e.lambda_a / 2.0;
    dm.m(0, 1) = -i * e.j_minus - (e.gamma_diss / 2.0) * std::conj(ph);
    dm.m(1, 0) = -i * e.j_plus - (e.gamma_diss / 2.0) * ph;
    dm.m(1, 1) = -i * e.delta_b_p - e.lambda_b / 2.0;
    dm.drive << -i * e.epsilon, cplx(0.0, 0.0);
    return dm;
}

namespace {

Eigen::Vector2cd eigenvector(const Eigen::Matrix2cd& m, cplx lambda) {
    const Eigen::Vector2cd u1(m(0, 1), lambda - m(0, 0));
    const Eigen::Vector2cd u2(lambda - m(1, 1), m(1, 0));
    const Eigen::Vector2cd& u = u1.norm() >= u2.norm() ? u1 : u2;
    return u.normalized();
}

}  // namespace

SpectralReport spectral(const DriftMatrix& dm, double tol) {
    const cplx A = dm.A(), B = dm.B(), C = dm.C(), D = dm.D();
    SpectralReport r;
    r.discriminant = (A - D) * (A - D) + 4.0 * B * C;
    const cplx half_trace = 0.5 * (A + D);
    const cplx root = 0.5 * std::sqrt(r.discriminant);
    r.lambda_plus = half_trace + root;
    r.lambda_minus = half_trace - root;

    const double norm = dm.m.norm();
    if (norm == 0.0) {
        r.eigvec_overlap = 0.0;
        r.is_ep = false;
        return r;
    }
    const double scale = norm * norm;
    if (std::abs(r.discriminant) <= tol * scale) {
        // Coalesced eigenvalues: defective unless the matrix is scalar.
        const bool scalar = std::max(std::abs(B), std::abs(C)) <= tol * norm;
        r.eigvec_overlap = scalar ? 0.0 : 1.0;
        r.is_ep = !scalar;
        return r;
    }
    const Eigen::Vector2cd vp = eigenvector(dm.m, r.lambda_plus);
    const Eigen::Vector2cd vm = eigenvector(dm.m, r.lambda_minus);
    r.eigvec_overlap = std::min(1.0, std::abs(vp.dot(vm)));
    r.is_ep = false;
    return r;
}

std::string_view to_string(EpVariable v) {
    switch (v) {
        case EpVariable::J: return "J";
        case EpVariable::Phi: return "phi";
        case EpVariable::DeltaB: return "delta_b_p";
        case EpVariable::Ratio: return "r";
    }
    return "?";
}

EpVariable ep_variable_from_string(std::string_view name) {
    if (name == "J" || name == "j") return EpVariable::J;
    if (name == "phi") return EpVariable::Phi;
    if (name == "delta_b_p" || name == "delta_b" || name == "delta") return EpVariable::DeltaB;
    if (name == "r") return EpVariable::Ratio;
    throw InvalidParameter("unknown EP variable '" + std::string(name) + "'");
}

EffectiveParams apply_ep_variable(EffectiveParams e, EpVariable var, double value) {
    switch (var) {
        case EpVariable::J: return with_coupling(e, value, e.phi);
        case EpVariable::Phi: return with_coupling(e, e.J, value);
        case EpVariable::DeltaB: e.delta_b_p = value; return e;
        case EpVariable::Ratio: {
            const double ka = e.kappa_a();
            if (!(ka > 0.0)) throw InvalidParameter("damping ratio needs kappa_a > 0");
            return with_local_decay(e, ka, value * ka);
        }
    }
    return e;
}

double read_ep_variable(const EffectiveParams& e, EpVariable var) {
    switch (var) {
        case EpVariable::J: return e.J;
        case EpVariable::Phi: return e.phi;
        case EpVariable::DeltaB: return e.delta_b_p;
        case EpVariable::Ratio: {
            const double ka = e.kappa_a();
            if (!(ka > 0.0)) throw InvalidParameter("damping ratio needs kappa_a > 0");
            return e.kappa_b() / ka;
        }
    }
    return 0.0;
}

namespace {

struct Probe {
    const EffectiveParams& base;
    std::span<const EpVariable> vars;

    EffectiveParams params(const Eigen::VectorXd& x) const {
        EffectiveParams e = base;
        for (std::size_t k = 0; k < vars.size(); ++k) {
            e = apply_ep_variable(e, vars[k], x(static_cast<Eigen::Index>(k)));
        }
        return e;
    }

    Eigen::Vector2d residual(const Eigen::VectorXd& x) const {
        const DriftMatrix dm = drift_matrix(params(x));
        const cplx d = (dm.A() - dm.D()) * (dm.A() - dm.D()) + 4.0 * dm.B() * dm.C();
        return {d.real(), d.imag()};
    }
};

double typical_scale(const EffectiveParams& e, EpVariable var) {
    switch (var) {
        case EpVariable::J: return std::max({std::abs(e.J), e.gamma_diss / 2.0, 1e-6});
        case EpVariable::Phi: return 1.0;
        case EpVariable::DeltaB:
            return std::max({e.gamma_diss, e.lambda_a, e.lambda_b, std::abs(e.delta_b_p), 1e-6});
        case EpVariable::Ratio: return 1.0;
    }
    return 1.0;
}

std::array<double, 3> starting_values(const EffectiveParams& e, EpVariable var) {
    const double v0 = read_ep_variable(e, var);
    const double s = typical_scale(e, var);
    switch (var) {
        case EpVariable::J: return {v0, 0.5 * s, 2.0 * s};
        case EpVariable::Phi:
            return {v0, v0 + 2.0 * std::numbers::pi / 3.0, v0 + 4.0 * std::numbers::pi / 3.0};
        case EpVariable::DeltaB: return {v0, v0 + s, v0 - s};
        case EpVariable::Ratio: {
            const double r0 = v0 > 0.0 ? v0 : 1.0;
            return {r0, 0.5 * r0, 2.0 * r0};
        }
    }
    return {v0, v0, v0};
}

bool admissible(std::span<const EpVariable> vars, const Eigen::VectorXd& x) {
    for (std::size_t k = 0; k < vars.size(); ++k) {
        if (vars[k] == EpVariable::Ratio && x(static_cast<Eigen::Index>(k)) < 0.0) return false;
        if (!std::isfinite(x(static_cast<Eigen::Index>(k)))) return false;
    }
    return true;
}

enum class Outcome { Converged, Stationary, Exhausted };

struct NewtonResult {
    Outcome outcome;
    Eigen::VectorXd x;
    double residual;
};

NewtonResult newton(const Probe& probe, Eigen::VectorXd x, const Eigen::VectorXd& scales,
                    double target, int max_iterations) {
    const auto n = x.size();
    Eigen::Vector2d F = probe.residual(x);
    double fnorm = F.norm();
    for (int it = 0; it < max_iterations; ++it) {
        if (fnorm <= target) return {Outcome::Converged, x, fnorm};

        Eigen::Matrix<double, 2, Eigen::Dynamic> jac(2, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double h = 1e-6 * std::max(std::abs(x(k)), scales(k));
            Eigen::VectorXd xp = x, xm = x;
            xp(k) += h;
            xm(k) -= h;
            jac.col(k) = (probe.residual(xp) - probe.residual(xm)) / (2.0 * h);
        }
        const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-F);
        if (!step.allFinite() || step.norm() == 0.0) return {Outcome::Stationary, x, fnorm};

        double alpha = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls) {
            Eigen::VectorXd trial = x + alpha * step;
            if (admissible(probe.vars, trial)) {
                const Eigen::Vector2d Ft = probe.residual(trial);
                if (Ft.norm() < fnorm) {
                    x = trial;
                    F = Ft;
                    fnorm = Ft.norm();
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!improved) {
            return {fnorm <= target ? Outcome::Converged : Outcome::Stationary, x, fnorm};
        }
        // Negligible relative movement with a finite residual: a nonzero local minimum.
        if ((alpha * step).cwiseQuotient(scales).cwiseAbs().maxCoeff() < 1e-15 && fnorm > target) {
            return {Outcome::Stationary, x, fnorm};
        }
    }
    return {fnorm <= target ? Outcome::Converged : Outcome::Exhausted, x, fnorm};
}

EpSolution make_solution(const EffectiveParams& e, std::span<const EpVariable> vars,
                         const Eigen::VectorXd& x, bool closed_form) {
    EpSolution s;
    s.params = e;
    for (std::size_t k = 0; k < vars.size(); ++k) {
        double v = x(static_cast<Eigen::Index>(k));
        if (vars[k] == EpVariable::Phi) v = wrap_phase(v);
        s.params = apply_ep_variable(s.params, vars[k], v);
        s.values.emplace_back(vars[k], v);
    }
    const SpectralReport rep = spectral(drift_matrix(s.params));
    s.residual = std::abs(rep.discriminant);
    s.overlap = rep.eigvec_overlap;
    s.closed_form = closed_form;
    return s;
}

}  // namespace

std::vector<EpSolution> solve_ep(const EffectiveParams& e, std::span<const EpVariable> free,
                                 const EpOptions& opts) {
    if (free.empty() || free.size() > 2) {
        throw InvalidParameter("solve_ep needs one or two free variables");
    }
    if (free.size() == 2 && free[0] == free[1]) {
        throw InvalidParameter("free variables must be distinct");
    }

    const double norm2 = drift_matrix(e).m.squaredNorm();
    const double target = opts.tol * std::max(1.0, norm2);

    if (free.size() == 1 && free[0] == EpVariable::J && !opts.force_newton) {
        const cplx ph = unit_phase(e.phi);
        const double detuning = e.delta_b_p - e.delta_a_p;
        const double mismatch = e.lambda_a - e.lambda_b;
        const double rate_scale = std::max({e.gamma_diss, e.lambda_a, e.lambda_b, 1e-300});
        const bool coherent_free = std::abs(e.g_coh) <= 1e-14 * rate_scale;
        const bool quarter_phase = std::abs(ph.real()) <= 1e-14;
        const bool real_disc = std::abs(detuning * mismatch) <= 1e-28 * rate_scale * rate_scale;
        if (coherent_free && quarter_phase && real_disc) {
            const double radicand = e.gamma_diss * e.gamma_diss - detuning * detuning +
                                    mismatch * mismatch / 4.0;
            // grid values like 0.04 + 1 ulp must not flip feasibility at the band edge
            const double terms = e.gamma_diss * e.gamma_diss + detuning * detuning +
                                 mismatch * mismatch / 4.0;
            const double round_off = 16.0 * std::numeric_limits<double>::epsilon() * terms;
            if (radicand < -round_off) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6g", radicand);
                throw NoRealSolution(std::string("no real J_EP: Γ² − Δ² + δΛ²/4 = ") + buf + " < 0");
            }
            Eigen::VectorXd x(1);
            x(0) = 0.5 * std::sqrt(std::max(radicand, 0.0));
            return {make_solution(e, free, x, true)};
        }
    }

    const Probe probe{e, free};
    const auto n = static_cast<Eigen::Index>(free.size());
    Eigen::VectorXd scales(n);
    std::vector<std::array<double, 3>> starts;
    for (Eigen::Index k = 0; k < n; ++k) {
        scales(k) = typical_scale(e, free[static_cast<std::size_t>(k)]);
        starts.push_back(starting_values(e, free[static_cast<std::size_t>(k)]));
    }

    std::vector<EpSolution> found;
    bool all_stationary = true;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 3; ++s) {
        Eigen::VectorXd x0(n);
        for (Eigen::Index k = 0; k < n; ++k) x0(k) = starts[static_cast<std::size_t>(k)][s];
        if (!admissible(free, x0)) continue;
        const NewtonResult res = newton(probe, x0, scales, target, opts.max_iterations);
        best = std::min(best, res.residual);
        if (res.outcome == Outcome::Exhausted) all_stationary = false;
        if (res.outcome != Outcome::Converged) continue;

        EpSolution sol = make_solution(e, free, res.x, false);
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](const EpSolution& f) {
            for (std::size_t k = 0; k < f.values.size(); ++k) {
                double a = f.values[k].second, b = sol.values[k].second;
                double diff = std::abs(a - b);
                if (free[k] == EpVariable::Phi) {
                    diff = std::min(diff, 2.0 * std::numbers::pi - diff);
                }
                if (diff > 1e-8 * std::max(1.0, scales(static_cast<Eigen::Index>(k)))) return false;
            }
            return true;
        });
        if (!duplicate) found.push_back(std::move(sol));
    }
    if (!found.empty()) return found;
    if (all_stationary) {
        throw NoRealSolution("discriminant has no real zero near the starting points (best |disc| = " +
                             std::to_string(best) + ")");
    }
    throw NonConvergence("EP Newton iteration did not converge", best);
}

}  // namespace nrqb
