#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nrqb/config.hpp"
#include "nrqb/dynamics.hpp"
#include "nrqb/error.hpp"
#include "nrqb/spectrum.hpp"

using namespace nrqb;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;

DriftMatrix matrix(cplx a, cplx b, cplx c, cplx d) {
    DriftMatrix dm;
    dm.m << a, b, c, d;
    dm.drive.setZero();
    return dm;
}

EffectiveParams detuned(double delta_b, double kappa_b = 0.003) {
    SystemParams p = baseline_preset();
    p.delta_b = delta_b;
    p.kappa_b = kappa_b;
    return reduce_to_effective(p);
}

const EpVariable kJ[] = {EpVariable::J};
}  // namespace

TEST_CASE("drift matrix entries") {
    const DriftMatrix dm = drift_matrix(reduce_to_effective(baseline_preset()));
    CHECK(std::abs(dm.B()) == 0.0);
    CHECK(std::abs(dm.C() - cplx(0.0, -0.04)) < 1e-16);
    CHECK(std::abs(dm.A() - cplx(-0.0215, 0.0)) < 1e-15);
    CHECK(std::abs(dm.D() - cplx(-0.0215, 0.0)) < 1e-15);
    CHECK(dm.drive(0) == cplx(0.0, -0.1));

    EffectiveParams zero;
    zero.omega_a = zero.omega_b = 0.0;
    CHECK(drift_matrix(zero).m.isZero());

    SystemParams r = baseline_preset();
    r.g_a = r.g_b = 0.0;
    r.kappa_a = r.kappa_b = 0.043;
    r.phi = 1.234;
    const DriftMatrix h = drift_matrix(reduce_to_effective(r));
    CHECK(std::abs(h.B() - cplx(0.0, -0.02)) < 1e-16);
    CHECK(std::abs(h.C() - cplx(0.0, -0.02)) < 1e-16);
    // B = 0 exactly when the backward amplitude vanishes
    const EffectiveParams e = reduce_to_effective(baseline_preset());
    CHECK(std::abs(drift_matrix(e).B() - coupling_amplitudes(e).backward) == 0.0);
}

TEST_CASE("spectral report") {
    SUBCASE("Jordan block at the nonreciprocal point") {
        const SpectralReport r = spectral(drift_matrix(reduce_to_effective(baseline_preset())));
        CHECK(r.lambda_plus.real() == Approx(-0.0215));
        CHECK(r.lambda_minus.real() == Approx(-0.0215));
        CHECK(std::abs(r.discriminant) == 0.0);
        CHECK(r.is_ep);
        CHECK(r.eigvec_overlap > 1.0 - 1e-8);
    }
    SUBCASE("diagonal with distinct entries") {
        const SpectralReport r = spectral(matrix(-1.0, 0.0, 0.0, cplx(-2.0, 1.0)));
        CHECK(r.eigvec_overlap == Approx(0.0).scale(1.0));
        CHECK_FALSE(r.is_ep);
    }
    SUBCASE("scalar matrix is not an EP") {
        const SpectralReport r = spectral(matrix(-1.0, 0.0, 0.0, -1.0));
        CHECK_FALSE(r.is_ep);
        CHECK(r.eigvec_overlap == 0.0);
    }
    SUBCASE("real discriminant with detuning") {
        for (const double delta : {0.0, 0.01, 0.03, 0.05}) {
            for (const double J : {0.005, 0.02, 0.03}) {
                const EffectiveParams e = with_coupling(detuned(delta), J, pi / 2.0);
                const cplx disc = spectral(drift_matrix(e)).discriminant;
                CHECK(disc.real() == Approx(-delta * delta + 0.04 * 0.04 - 4.0 * J * J).scale(1e-6).epsilon(1e-12));
                CHECK(std::abs(disc.imag()) < 1e-17);
            }
        }
    }
}

TEST_CASE("trace and determinant identities for random matrices") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n;
    for (int k = 0; k < 1000; ++k) {
        const double scale = std::pow(10.0, 4.0 * (std::abs(n(rng)) - 1.0));
        const DriftMatrix dm = matrix(scale * cplx(n(rng), n(rng)), scale * cplx(n(rng), n(rng)),
                                      scale * cplx(n(rng), n(rng)), scale * cplx(n(rng), n(rng)));
        const SpectralReport r = spectral(dm);
        const cplx tr = dm.m.trace(), det = dm.m.determinant();
        const double norm = dm.m.norm();
        CHECK(std::abs(r.lambda_plus + r.lambda_minus - tr) <= 1e-12 * norm);
        CHECK(std::abs(r.lambda_plus * r.lambda_minus - det) <= 1e-12 * norm * norm);
        CHECK(r.eigvec_overlap >= 0.0);
        CHECK(r.eigvec_overlap <= 1.0 + 1e-12);
        if (r.is_ep) CHECK(r.eigvec_overlap > 1.0 - 1e-8);
    }
}

TEST_CASE("eigenvalue real part sets the free decay rate") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        SystemParams p = baseline_preset();
        p.epsilon = 0.0;
        p.kappa_a = 0.01 * u(rng);
        p.kappa_b = 0.01 + 0.05 * u(rng);
        p.phi = 2.0 * pi * u(rng);
        p.J = 0.005 + 0.01 * u(rng);
        p.delta_b = 0.05 * (u(rng) - 0.5);
        const EffectiveParams e = reduce_to_effective(p);
        const SpectralReport r = spectral(drift_matrix(e));
        const double slowest = std::max(r.lambda_plus.real(), r.lambda_minus.real());
        REQUIRE(slowest < 0.0);
        if (std::abs(r.lambda_plus.real() - r.lambda_minus.real()) < 0.2 * std::abs(slowest)) continue;
        const double t1 = 30.0 / std::abs(r.lambda_plus.real() - r.lambda_minus.real()) + 10.0 / std::abs(slowest);
        const double t2 = t1 + 5.0 / std::abs(slowest);
        const std::vector<double> grid = {t1, t2};
        IntegratorOptions o;
        o.rtol = 1e-12;
        o.atol = 1e-20;
        const Trajectory t = integrate(e, MomentState::coherent(Eigen::Vector2cd(1.0, cplx(0.0, 1.0))), grid, o);
        const double slope = std::log(t.states[1].first.norm() / t.states[0].first.norm()) / (t2 - t1);
        CHECK(slope == Approx(slowest).epsilon(0.01));
    }
}

TEST_CASE("exceptional points from the closed form") {
    const auto s1 = solve_ep(reduce_to_effective(baseline_preset()), kJ);
    REQUIRE(s1.size() == 1);
    CHECK(s1[0].closed_form);
    CHECK(std::abs(s1[0].values[0].second - 0.02) < 1e-10);

    const auto s10 = solve_ep(detuned(0.0, 0.03), kJ);
    const double dl = 0.043 - 0.07;
    CHECK(s10[0].values[0].second == Approx(0.5 * std::sqrt(0.0016 + dl * dl / 4.0)).epsilon(1e-12));
    CHECK(s10[0].values[0].second == Approx(0.02110).epsilon(1e-4));
    CHECK(std::abs(spectral(drift_matrix(s10[0].params)).discriminant) < 1e-15);
    CHECK(s10[0].overlap > 0.9999);

    CHECK_THROWS_AS(solve_ep(detuned(0.05), kJ), NoRealSolution);
    CHECK_NOTHROW(solve_ep(detuned(0.04), kJ));
    CHECK(solve_ep(detuned(0.03), kJ)[0].values[0].second == Approx(0.5 * std::sqrt(0.0016 - 0.0009)));
}

TEST_CASE("Newton branch agrees with the closed form") {
    EpOptions newton;
    newton.force_newton = true;
    for (const double kb : {0.003, 0.03, 0.3, 0.0003}) {
        for (const double delta : {0.0, 0.02}) {
            if (delta != 0.0 && kb != 0.003) continue;  // closed form needs Δ·δΛ = 0
            const EffectiveParams e = detuned(delta, kb);
            const double cf = solve_ep(e, kJ)[0].values[0].second;
            const auto nw = solve_ep(e, kJ, newton);
            bool found = false;
            for (const auto& s : nw) found = found || std::abs(s.values[0].second - cf) < 1e-10;
            CHECK(found);
        }
    }
}

TEST_CASE("solutions zero the discriminant") {
    struct Case {
        EffectiveParams e;
        std::vector<EpVariable> free;
    };
    SystemParams coh = baseline_preset();
    coh.delta_c = 3.0;
    const std::vector<Case> cases = {
        {detuned(0.0, 0.03), {EpVariable::J, EpVariable::Phi}},
        {detuned(0.01, 0.03), {EpVariable::J, EpVariable::DeltaB}},
        {reduce_to_effective(coh), {EpVariable::J, EpVariable::Phi}},
        {detuned(0.01), {EpVariable::J, EpVariable::Ratio}},
    };
    for (const auto& c : cases) {
        const auto sols = solve_ep(c.e, c.free);
        REQUIRE(!sols.empty());
        for (const auto& s : sols) {
            const SpectralReport r = spectral(drift_matrix(s.params));
            CHECK(std::abs(r.discriminant) < 1e-10 * std::max(1.0, drift_matrix(s.params).m.squaredNorm()));
            CHECK(s.overlap > 1.0 - 1e-4);
            CHECK(s.values.size() == c.free.size());
        }
    }
}

TEST_CASE("single free variables other than J") {
    // detuning that closes the gap at J = 0.015: Δ² = Γ² − 4J²
    const EffectiveParams e = with_coupling(detuned(0.0), 0.015, pi / 2.0);
    const EpVariable d[] = {EpVariable::DeltaB};
    const auto sols = solve_ep(e, d);
    REQUIRE(!sols.empty());
    for (const auto& s : sols) {
        CHECK(std::abs(s.values[0].second) == Approx(std::sqrt(0.0016 - 0.0009)).epsilon(1e-8));
    }
    // no real detuning beyond J = Γ/2 when r = 1
    CHECK_THROWS(solve_ep(with_coupling(detuned(0.0), 0.03, pi / 2.0), d));
}

TEST_CASE("free variable names and validation") {
    CHECK(ep_variable_from_string("J") == EpVariable::J);
    CHECK(ep_variable_from_string("phi") == EpVariable::Phi);
    CHECK(ep_variable_from_string("delta_b") == EpVariable::DeltaB);
    CHECK(ep_variable_from_string("r") == EpVariable::Ratio);
    CHECK(to_string(EpVariable::Ratio) == "r");
    CHECK_THROWS(ep_variable_from_string("kappa"));
    CHECK_THROWS(solve_ep(detuned(0.0), std::span<const EpVariable>{}));
    const EpVariable twice[] = {EpVariable::J, EpVariable::J};
    CHECK_THROWS(solve_ep(detuned(0.0), twice));

    const EffectiveParams e = detuned(0.0);
    const EffectiveParams r10 = apply_ep_variable(e, EpVariable::Ratio, 10.0);
    CHECK(r10.kappa_b() == Approx(0.03));
    CHECK(read_ep_variable(r10, EpVariable::Ratio) == Approx(10.0));
    CHECK(read_ep_variable(apply_ep_variable(e, EpVariable::DeltaB, 0.01), EpVariable::DeltaB) == 0.01);
}
