#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nrqb/config.hpp"
#include "nrqb/error.hpp"
#include "nrqb/model.hpp"

using namespace nrqb;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;

EffectiveParams couplings_only(double G, double Gamma, double J, double phi) {
    EffectiveParams e;
    e.g_coh = G;
    e.gamma_diss = Gamma;
    return with_coupling(e, J, phi);
}
}  // namespace

TEST_CASE("baseline reduction") {
    const EffectiveParams e = reduce_to_effective(baseline_preset());
    CHECK(e.gamma_a_eff == Approx(0.04).epsilon(1e-14));
    CHECK(e.gamma_b_eff == Approx(0.04).epsilon(1e-14));
    CHECK(e.gamma_diss == Approx(0.04).epsilon(1e-14));
    CHECK(e.g_coh == 0.0);
    CHECK(e.delta_a_p == 0.0);
    CHECK(e.delta_b_p == 0.0);
    CHECK(e.lambda_a == Approx(0.043).epsilon(1e-14));
    CHECK(e.lambda_b == Approx(0.043).epsilon(1e-14));
    CHECK(e.j_plus == cplx(0.02, 0.0));
    CHECK(e.j_minus == cplx(0.02, 0.0));
    CHECK(e.kappa_a() == Approx(0.003).epsilon(1e-12));
}

TEST_CASE("decoupled charger") {
    SystemParams p = baseline_preset();
    p.g_a = 0.0;
    const EffectiveParams e = reduce_to_effective(p);
    CHECK(e.gamma_a_eff == 0.0);
    CHECK(e.g_coh == 0.0);
    CHECK(e.gamma_diss == 0.0);
    CHECK(e.lambda_a == p.kappa_a);
}

TEST_CASE("detuned lossy cavity gives a coherent induced coupling") {
    SystemParams p;
    p.delta_c = 10.0;
    p.gamma_m = 20.0;
    p.g_a = p.g_b = 1.0;
    const EffectiveParams e = reduce_to_effective(p);
    CHECK(e.gamma_a_eff == Approx(0.05).epsilon(1e-14));
    CHECK(e.gamma_b_eff == Approx(0.05).epsilon(1e-14));
    CHECK(e.gamma_diss == Approx(0.05).epsilon(1e-14));
    CHECK(e.g_coh == Approx(0.05).epsilon(1e-14));
    CHECK(e.delta_a_p == Approx(-0.05).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
    SystemParams p = baseline_preset();
    p.phi = -pi / 2.0;
    CHECK(validated(p).phi == Approx(3.0 * pi / 2.0));
    p.phi = 5.0 * pi;
    CHECK(validated(p).phi == Approx(pi));
    for (auto bad : {&SystemParams::kappa_a, &SystemParams::kappa_b, &SystemParams::g_a,
                     &SystemParams::g_b, &SystemParams::epsilon}) {
        SystemParams q = baseline_preset();
        q.*bad = -1e-3;
        CHECK_THROWS_AS(validated(q), InvalidParameter);
    }
    SystemParams q = baseline_preset();
    q.gamma_m = 0.0;
    CHECK_THROWS_AS(reduce_to_effective(q), InvalidParameter);
    q = baseline_preset();
    q.J = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validated(q), InvalidParameter);
}

TEST_CASE("unit phase is exact on the axes") {
    CHECK(unit_phase(0.0) == cplx(1.0, 0.0));
    CHECK(unit_phase(pi / 2.0) == cplx(0.0, 1.0));
    CHECK(unit_phase(pi) == cplx(-1.0, 0.0));
    CHECK(unit_phase(3.0 * pi / 2.0) == cplx(0.0, -1.0));
    CHECK(std::abs(unit_phase(pi / 4.0) - std::polar(1.0, pi / 4.0)) < 1e-16);
}

TEST_CASE("adiabatic regime report") {
    const RegimeReport base = validate_adiabatic(baseline_preset());
    CHECK(base.ok());
    CHECK(base.decay_margin == Approx(20.0 / 0.003));
    CHECK(base.coupling_margin == Approx(10.0 / std::sqrt(0.4)));

    SystemParams free = baseline_preset();
    free.g_a = free.g_b = 0.0;
    const RegimeReport r0 = validate_adiabatic(free);
    CHECK(r0.ok());
    CHECK(std::isinf(r0.coupling_margin));

    SystemParams bad;
    bad.gamma_m = 1.0;
    bad.g_a = bad.g_b = 1.0;
    bad.kappa_a = bad.kappa_b = 0.5;
    const RegimeReport rb = validate_adiabatic(bad);
    CHECK_FALSE(rb.decay_ok);
    CHECK_FALSE(rb.coupling_ok);
    CHECK(validate_adiabatic(bad, 2.0, 0.5).ok());
}

TEST_CASE("coupling amplitudes") {
    const CouplingAmplitudes nr = coupling_amplitudes(reduce_to_effective(baseline_preset()));
    CHECK(std::abs(nr.backward) == 0.0);
    CHECK(std::abs(nr.forward - cplx(0.0, -0.04)) < 1e-15);
    CHECK(nr.isolation_ratio == 0.0);

    const CouplingAmplitudes recip = coupling_amplitudes(couplings_only(0.0, 0.0, 0.02, 0.3));
    CHECK(std::abs(recip.forward - cplx(0.0, -0.02)) < 1e-16);
    CHECK(std::abs(recip.backward - cplx(0.0, -0.02)) < 1e-16);

    const CouplingAmplitudes flat = coupling_amplitudes(couplings_only(0.0, 0.04, 0.02, 0.0));
    CHECK(std::abs(flat.backward - cplx(-0.02, -0.02)) < 1e-16);
    CHECK(std::abs(flat.forward - cplx(-0.02, -0.02)) < 1e-16);
    CHECK(flat.isolation_ratio == Approx(1.0));

    const CouplingAmplitudes none = coupling_amplitudes(couplings_only(0.0, 0.0, 0.0, 0.0));
    CHECK(none.isolation_ratio == 1.0);
}

TEST_CASE("solving the nonreciprocity condition") {
    SUBCASE("no coherent coupling") {
        const NonreciprocalSolution s = solve_nonreciprocal(couplings_only(0.0, 0.04, 0.0, 0.0));
        CHECK(s.J == Approx(0.02).epsilon(1e-15));
        CHECK(s.phi == Approx(pi / 2.0).epsilon(1e-15));
        CHECK(s.residual < 1e-15);
    }
    SUBCASE("with coherent coupling") {
        const EffectiveParams e = couplings_only(0.05, 0.1, 0.0, 0.0);
        const NonreciprocalSolution s = solve_nonreciprocal(e);
        CHECK(s.phi == Approx(pi / 4.0).epsilon(1e-14));
        CHECK(s.J == Approx(0.05 * std::sqrt(2.0)).epsilon(1e-14));
        CHECK(std::abs(coupling_amplitudes(with_coupling(e, s.J, s.phi)).backward) < 1e-12);
    }
    SUBCASE("incompatible pinned phase") {
        CHECK_THROWS_AS(solve_nonreciprocal(couplings_only(0.0, 0.04, 0.0, 0.0), 0.0),
                        IncompatiblePhase);
        const auto ok = solve_nonreciprocal(couplings_only(0.0, 0.04, 0.0, 0.0), pi / 2.0);
        CHECK(ok.J == Approx(0.02));
    }
    SUBCASE("requires dissipative coupling") {
        CHECK_THROWS(solve_nonreciprocal(couplings_only(0.05, 0.0, 0.0, 0.0)));
    }
}

TEST_CASE("reduction invariants over random parameters") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        SystemParams p;
        p.delta_a = 0.2 * (u(rng) - 0.5);
        p.delta_b = 0.2 * (u(rng) - 0.5);
        p.delta_c = 40.0 * (u(rng) - 0.5);
        p.g_a = 2.0 * u(rng);
        p.g_b = 2.0 * u(rng);
        p.J = 0.1 * u(rng);
        p.phi = 2.0 * pi * u(rng);
        p.kappa_a = 0.01 * u(rng);
        p.kappa_b = 0.01 * u(rng);
        p.gamma_m = 1.0 + 40.0 * u(rng);
        const EffectiveParams e = reduce_to_effective(p);
        const double scale = e.gamma_a_eff * e.gamma_b_eff + 1e-300;
        CHECK(std::abs(e.gamma_diss * e.gamma_diss - e.gamma_a_eff * e.gamma_b_eff) <= 1e-14 * scale);
        CHECK(std::abs(e.g_coh * p.gamma_m / 2.0 - e.gamma_diss * p.delta_c) <=
              1e-14 * (std::abs(e.gamma_diss * p.delta_c) + 1e-300));
        CHECK(std::abs(e.j_minus - std::conj(e.j_plus)) <= 1e-16);
        CHECK(e.lambda_a >= p.kappa_a);
        CHECK(e.lambda_b >= p.kappa_b);

        // forward amplitude reduces to −iJ without the induced couplings
        EffectiveParams bare = e;
        bare.gamma_diss = 0.0;
        bare.g_coh = 0.0;
        bare = with_coupling(bare, p.J, p.phi);
        CHECK(std::abs(coupling_amplitudes(bare).forward - cplx(0.0, -p.J)) < 1e-16);

        if (e.gamma_diss > 1e-6) {
            const NonreciprocalSolution s = solve_nonreciprocal(e);
            CHECK(std::abs(coupling_amplitudes(with_coupling(e, s.J, s.phi)).backward) < 1e-12);
        }
    }
}

TEST_CASE("rate-matched three-mode mapping") {
    const SystemParams p = baseline_preset();
    const SystemParams q = rate_matched_three_mode(p);
    CHECK(q.g_a == Approx(p.g_a / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(q.g_b == Approx(p.g_b / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(q.gamma_m == p.gamma_m);
    CHECK(q.delta_c == 0.0);

    SystemParams d = p;
    d.delta_c = 5.0;
    const SystemParams qd = rate_matched_three_mode(d);
    CHECK(qd.delta_c == Approx(10.0));
    const double gam = d.gamma_m / 2.0;
    const double factor = std::sqrt((4.0 * 25.0 + gam * gam) / (2.0 * (25.0 + gam * gam)));
    CHECK(qd.g_a == Approx(d.g_a * factor));
}

TEST_CASE("superconducting preset") {
    const SystemParams p = superconducting_preset();
    CHECK(p.kappa_a == Approx(0.08));
    CHECK(p.kappa_b == Approx(0.06));
    CHECK(p.gamma_m == Approx(5.0));
    CHECK(p.J == Approx(0.01));
    const EffectiveParams e = reduce_to_effective(p);
    // reduction with γ = γ_m/2
    CHECK(e.gamma_diss == Approx(0.04356).epsilon(1e-10));
    // the g²/γ_m convention used for the quoted ≈0.02 MHz
    CHECK(p.g_a * p.g_b / p.gamma_m == Approx(0.02178).epsilon(1e-10));
    const SystemParams khz = superconducting_preset(1e-3);
    CHECK(khz.gamma_m == Approx(5000.0));
}
