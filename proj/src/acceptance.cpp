#include "nrqb/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include "nrqb/analytic.hpp"
#include "nrqb/config.hpp"
#include "nrqb/dynamics.hpp"
#include "nrqb/error.hpp"
#include "nrqb/experiments.hpp"
#include "nrqb/spectrum.hpp"

namespace nrqb {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

CriterionResult criterion(std::string id, std::string title, bool hard) {
    CriterionResult r;
    r.id = std::move(id);
    r.title = std::move(title);
    r.hard = hard;
    return r;
}

std::string sci(double v) { return fmt("%.2e", v); }

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }
bool within_rel(double x, double target, double rel) {
    return std::abs(x - target) <= rel * std::abs(target);
}

IntegratorOptions tight() {
    IntegratorOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    return o;
}

/// max_t |x − y| / max_t |y|
template <class F>
double scaled_dev(std::size_t n, F&& pair) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto [x, y] = pair(k);
        num = std::max(num, std::abs(x - y));
        den = std::max(den, std::abs(y));
    }
    return den > 0.0 ? num / den : num;
}

CriterionResult h1(double s) {
    CriterionResult r = criterion("H1", "analytic-ODE equivalence", true);
    const EffectiveParams e = reduce_to_effective(baseline_preset());
    const auto grid = uniform_grid(200.0, 2001);
    const auto t0 = Clock::now();
    const Trajectory ode = integrate(e, MomentState::vacuum(2), grid);
    const Trajectory cf = closed_form_trajectory(e, grid);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const std::size_t n = grid.size();
    const double dev_a = scaled_dev(n, [&](std::size_t k) {
        return std::pair{ode.states[k].first(0), cf.states[k].first(0)};
    });
    const double dev_b = scaled_dev(n, [&](std::size_t k) {
        return std::pair{ode.states[k].first(1), cf.states[k].first(1)};
    });
    const double dev_naa = scaled_dev(n, [&](std::size_t k) {
        return std::pair{ode.states[k].second(0, 0), cf.states[k].second(0, 0)};
    });
    const double dev_nbb = scaled_dev(n, [&](std::size_t k) {
        return std::pair{ode.states[k].second(1, 1), cf.states[k].second(1, 1)};
    });
    const double dev_nab = scaled_dev(n, [&](std::size_t k) {
        return std::pair{ode.states[k].second(0, 1), cf.states[k].second(0, 1)};
    });
    const double worst = std::max({dev_a, dev_b, dev_naa, dev_nbb, dev_nab});
    r.passed = worst <= 1e-6 * s && secs < 1.0 * s;
    r.detail = "max rel dev <a> " + sci(dev_a) + ", <b> " + sci(dev_b) + ", N_aa " + sci(dev_naa) +
               ", N_bb " + sci(dev_nbb) + ", N_ab " + sci(dev_nab) + " (<= " + sci(1e-6 * s) +
               "); runtime " + fmt("%.3f", secs) + " s (< " + fmt("%.3g", 1.0 * s) + " s)";
    return r;
}

CriterionResult h2(double s) {
    CriterionResult r = criterion("H2", "steady-state formulas", true);
    const SteadyEnergies st = steady_energies(reduce_to_effective(baseline_preset()));
    const bool derived = within(st.e_a, 21.63, 0.01 * s) && within(st.e_b, 74.88, 0.01 * s) &&
                         within(st.eta, 0.776, 0.001 * s);
    const bool reference = within_rel(st.e_b, 75.9, 0.02 * s) && within_rel(st.eta, 0.78, 0.02 * s);
    r.passed = derived && reference && st.closed_form;
    r.detail = "E_A " + fmt("%.4f", st.e_a) + " (21.63±" + fmt("%.3g", 0.01 * s) + "), E_B " +
               fmt("%.4f", st.e_b) + " (74.88±" + fmt("%.3g", 0.01 * s) + "), eta " +
               fmt("%.5f", st.eta) + " (0.776±" + fmt("%.3g", 0.001 * s) + "); vs reference 75.9: " +
               fmt("%.2f", 100.0 * std::abs(st.e_b - 75.9) / 75.9) + "%, vs 0.78: " +
               fmt("%.2f", 100.0 * std::abs(st.eta - 0.78) / 0.78) + "% (<= " +
               fmt("%.3g", 2.0 * s) + "%)";
    return r;
}

CriterionResult h3(double s) {
    CriterionResult r = criterion("H3", "detuned steady states", true);
    SystemParams p = baseline_preset();
    p.delta_b = 0.01;
    const double e1 = steady_energies(reduce_to_effective(p)).e_b;
    p.delta_b = 0.1;
    const double e2 = steady_energies(reduce_to_effective(p)).e_b;
    r.passed = within_rel(e1, 61.6, 0.02 * s) && within_rel(e2, 3.31, 0.02 * s);
    r.detail = "delta_b=0.01: E_B " + fmt("%.4f", e1) + " (61.6±" + fmt("%.3g", 2.0 * s) +
               "%, reference 62.2); delta_b=0.1: E_B " + fmt("%.4f", e2) + " (3.31±" +
               fmt("%.3g", 2.0 * s) + "%, reference 3.3)";
    return r;
}

CriterionResult h4(double s) {
    CriterionResult r = criterion("H4", "nonreciprocity isolation", true);
    IntegratorOptions rk4;
    rk4.method = StepMethod::ClassicalRk4;
    rk4.fixed_step = 0.05;
    const auto grid = uniform_grid(200.0, 401);

    auto charger_shift = [&](const EffectiveParams& e) {
        const Trajectory ref = integrate(e, MomentState::vacuum(2), grid, rk4);
        double worst = 0.0;
        for (const cplx beta : {cplx(1.0, 0.0), cplx(1e3, 0.0), cplx(0.0, -1e3),
                                cplx(-700.0, 700.0)}) {
            Eigen::Vector2cd v(0.0, beta);
            const Trajectory t = integrate(e, MomentState::coherent(v), grid, rk4);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                worst = std::max(worst, std::abs(t.states[k].first(0) - ref.states[k].first(0)));
            }
        }
        return worst;
    };
    SystemParams p = baseline_preset();
    const double isolated = charger_shift(reduce_to_effective(p));
    p.phi = std::numbers::pi / 4.0;
    const double broken = charger_shift(reduce_to_effective(p));
    r.passed = isolated < 1e-12 * s && broken > 1e-3 / std::max(s, 1e-300);
    r.detail = "max |delta <a>| at phi=pi/2: " + sci(isolated) + " (< " + sci(1e-12 * s) +
               "); at phi=pi/4: " + sci(broken) + " (> 1e-3)";
    return r;
}

CriterionResult h5(double s) {
    CriterionResult r = criterion("H5", "coherent-state factorization", true);
    const SystemParams p = baseline_preset();
    const auto grid = uniform_grid(1000.0, 2001);
    const Trajectory eff = integrate(reduce_to_effective(p), MomentState::vacuum(2), grid, tight());
    const Trajectory full =
        integrate(rate_matched_three_mode(p), MomentState::vacuum(3), grid, tight());
    double de = 0.0, df = 0.0;
    for (const auto& st : eff.states) de = std::max(de, st.factorization_defect());
    for (const auto& st : full.states) df = std::max(df, st.factorization_defect());
    r.passed = de < 1e-8 * s && df < 1e-8 * s;
    r.detail = "max ||N - v*v^T||_inf effective " + sci(de) + ", full " + sci(df) + " (< " +
               sci(1e-8 * s) + ")";
    return r;
}

CriterionResult h6(double s) {
    CriterionResult r = criterion("H6", "full-vs-effective convergence", true);
    std::vector<double> devs;
    double steady_err = 0.0;
    IntegratorOptions opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;
    const auto grid = uniform_grid(200.0, 2001);  // Jt ∈ [0, 4]
    for (const double gm : {20.0, 50.0, 100.0}) {
        const SystemParams p = baseline_with_gamma_m(gm);
        const SystemParams pf = rate_matched_three_mode(p);
        const EffectiveParams e = reduce_to_effective(p);
        if (gm == 20.0) {
            const double se = steady_energies(e).e_b;
            steady_err = std::abs(full_steady_state(pf).e_b - se) / se;
        }
        const Trajectory te = integrate(e, MomentState::vacuum(2), grid, opts);
        const Trajectory tf = integrate(pf, MomentState::vacuum(3), grid, opts);
        devs.push_back(scaled_dev(grid.size(), [&](std::size_t k) {
            return std::pair{tf.e_b[k], te.e_b[k]};
        }));
    }
    const bool decreasing = devs[0] > devs[1] && devs[1] > devs[2];
    r.passed = steady_err < 0.05 * s && decreasing;
    r.detail = "steady rel err at gamma_m=20: " + sci(steady_err) + " (< " + sci(0.05 * s) +
               "); transient E_B dev at gamma_m 20/50/100: " + sci(devs[0]) + " / " +
               sci(devs[1]) + " / " + sci(devs[2]) + (decreasing ? " (decreasing)" : " (NOT decreasing)");
    return r;
}

CriterionResult h7(double s) {
    CriterionResult r = criterion("H7", "exceptional-point solver", true);
    const EpVariable free[] = {EpVariable::J};
    const EffectiveParams base = reduce_to_effective(baseline_preset());

    const auto s1 = solve_ep(base, free);
    const double j1 = s1.front().values.front().second;

    const EffectiveParams e10 = with_local_decay(base, 0.003, 0.03);
    const auto s10 = solve_ep(e10, free);
    const double j10 = s10.front().values.front().second;
    const double dl = e10.lambda_a - e10.lambda_b;
    const double expect = 0.5 * std::sqrt(0.04 * 0.04 + dl * dl / 4.0);
    const double disc = std::abs(spectral(drift_matrix(s10.front().params)).discriminant);
    const double overlap = s10.front().overlap;

    SystemParams far = baseline_preset();
    far.delta_b = 0.05;
    bool no_real = false;
    try {
        (void)solve_ep(reduce_to_effective(far), free);
    } catch (const NoRealSolution&) {
        no_real = true;
    }
    r.passed = std::abs(j1 - 0.02) <= 1e-10 * s && std::abs(j10 - expect) <= 1e-10 * s &&
               within(j10, 0.02110, 1e-5 * s) && disc < 1e-12 * s && overlap > 1.0 - 1e-4 * s &&
               no_real;
    r.detail = "r=1: J_EP " + fmt("%.12f", j1) + "; r=10: J_EP " + fmt("%.12f", j10) +
               " (expected " + fmt("%.12f", expect) + "), |disc| " + sci(disc) + ", overlap " +
               fmt("%.6f", overlap) + "; |delta|=0.05: " +
               (no_real ? "NoRealSolution" : "unexpected solution");
    return r;
}

CriterionResult h8(double s) {
    CriterionResult r = criterion("H8", "closed-system conservation", true);
    SystemParams p = baseline_preset();
    p.g_a = p.g_b = 0.0;
    p.kappa_a = p.kappa_b = 0.0;
    p.epsilon = 0.0;
    const EffectiveParams e = reduce_to_effective(p);
    const auto grid = uniform_grid(50.0 / p.J, 2001);
    const Trajectory t =
        integrate(e, MomentState::coherent(Eigen::Vector2cd(cplx(1.0, 0.5), cplx(-0.3, 0.8))),
                  grid, tight());
    const double e0 = t.e_a.front() + t.e_b.front();
    double drift = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        drift = std::max(drift, std::abs(t.e_a[k] + t.e_b[k] - e0));
    }
    r.passed = drift < 1e-9 * s;
    r.detail = "max |E_A+E_B - E_0| over Jt in [0,50]: " + sci(drift) + " (E_0 = " +
               fmt("%.4f", e0) + ", < " + sci(1e-9 * s) + ")";
    return r;
}

struct Peak {
    double value;
    double jt;
    int local_maxima;
};

Peak power_peak(double delta_b) {
    SystemParams p = baseline_preset();
    p.delta_b = delta_b;
    const auto grid = uniform_grid(5.0 / p.J, 2001);
    const Trajectory t = integrate(reduce_to_effective(p), MomentState::vacuum(2), grid);
    const auto it = std::max_element(t.power.begin(), t.power.end());
    Peak pk{*it, p.J * grid[static_cast<std::size_t>(it - t.power.begin())], 0};
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        if (t.power[k] > t.power[k - 1] && t.power[k] >= t.power[k + 1]) ++pk.local_maxima;
    }
    return pk;
}

CriterionResult s1(double s) {
    CriterionResult r = criterion("S1", "power peak", false);
    const Peak p0 = power_peak(0.0), p1 = power_peak(0.01), p2 = power_peak(0.1);
    r.passed = within_rel(p0.value, 0.52, 0.10 * s) && within(p0.jt, 2.0, 0.3 * s) &&
               within_rel(p1.value, 0.486, 0.10 * s) && within_rel(p2.value, 0.06, 0.50 * s) &&
               p2.local_maxima >= 2;
    r.detail = "delta=0: peak " + fmt("%.4f", p0.value) + " at Jt " + fmt("%.3f", p0.jt) +
               " (0.52±10%, Jt 2±0.3); delta=0.01: " + fmt("%.4f", p1.value) +
               " (0.486±10%); delta=0.1: " + fmt("%.4f", p2.value) + " (0.06±50%), " +
               std::to_string(p2.local_maxima) + " local maxima";
    return r;
}

CriterionResult s2(double s) {
    CriterionResult r = criterion("S2", "damping-ratio text values", false);
    auto eb_at = [](double ratio) {
        SystemParams p = baseline_preset();
        p.kappa_b = ratio * p.kappa_a;
        const EffectiveParams e = reduce_to_effective(p);
        return std::pair{closed_form_moments(4.0 / p.J, e).n_bb, steady_energies(e).e_b};
    };
    const auto [lo_t, lo_inf] = eb_at(0.01);
    const auto [hi_t, hi_inf] = eb_at(10.0);
    r.passed = within_rel(lo_t, 87.0, 0.15 * s);
    r.detail = "r=0.01: E_B(Jt=4) " + fmt("%.2f", lo_t) + " vs 87±15% (steady " +
               fmt("%.2f", lo_inf) + "); r=10: E_B(Jt=4) " + fmt("%.2f", hi_t) +
               " vs reference 14.8 (steady " + fmt("%.2f", hi_inf) + ", known discrepancy, reported)";
    return r;
}

CriterionResult s3(double s) {
    CriterionResult r = criterion("S3", "EP vs nonreciprocal retention", false);
    const Dataset d = figure4('b');
    const std::size_t cd = d.column("delta"), cn = d.column("e_b_nor"), ce = d.column("e_b_ep");
    double zero_gap = 1.0;
    int feasible = 0, below = 0;
    double worst = 0.0, worst_delta = 0.0;
    for (std::size_t k = 0; k < d.rows.size(); ++k) {
        const auto& row = d.rows[k];
        if (d.status[k] != "ok") continue;
        if (std::abs(row[cd]) < 1e-12) {
            zero_gap = std::abs(row[ce] - row[cn]) / row[cn];
            continue;
        }
        ++feasible;
        if (row[ce] < row[cn]) {
            ++below;
            if (row[cn] - row[ce] > worst) {
                worst = row[cn] - row[ce];
                worst_delta = row[cd];
            }
        }
    }
    r.passed = zero_gap < 1e-3 * s && below == 0;
    r.detail = "delta=0 gap " + sci(zero_gap) + " (< " + sci(1e-3 * s) + "); E_EP < E_nor at " +
               std::to_string(below) + "/" + std::to_string(feasible) +
               " feasible delta!=0 samples" +
               (below ? " (largest shortfall " + fmt("%.3f", worst) + " at delta=" +
                            fmt("%.3f", worst_delta) + ")"
                      : "");
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
    const double s = opts.tolerance_scale;
    const std::vector<std::function<CriterionResult(double)>> suite = {h1, h2, h3, h4, h5, h6,
                                                                       h7, h8, s1, s2, s3};
    std::vector<CriterionResult> out;
    for (const auto& c : suite) {
        const auto t0 = Clock::now();
        CriterionResult r;
        try {
            r = c(s);
        } catch (const std::exception& ex) {
            r.passed = false;
            r.detail = std::string("exception: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    const char* tag = r.passed ? "PASS" : (r.hard ? "FAIL" : "FLAG");
    return std::string(tag) + " " + r.id + " " + r.title + ": " + r.detail;
}

bool hard_criteria_pass(const std::vector<CriterionResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CriterionResult& r) { return !r.hard || r.passed; });
}

bool print_report(std::ostream& out, const std::vector<CriterionResult>& results) {
    int hard = 0, hard_ok = 0, soft = 0, soft_ok = 0;
    double total = 0.0;
    for (const auto& r : results) {
        out << format_result(r) << '\n';
        (r.hard ? hard : soft)++;
        if (r.passed) (r.hard ? hard_ok : soft_ok)++;
        total += r.seconds;
    }
    const bool ok = hard_criteria_pass(results);
    out << "hard " << hard_ok << "/" << hard << " passed, soft " << soft_ok << "/" << soft
        << " passed, " << fmt("%.2f", total) << " s -> " << (ok ? "OK" : "FAILED") << '\n';
    return ok;
}

}  // namespace nrqb
