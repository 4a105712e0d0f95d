#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nrqb/config.hpp"
#include "nrqb/error.hpp"
#include "nrqb/experiments.hpp"

using namespace nrqb;
using doctest::Approx;

namespace {
SweepAxis list(const std::string& name, std::vector<double> v) {
    SweepAxis a;
    a.name = name;
    a.explicit_values = std::move(v);
    return a;
}

SweepAxis range(const std::string& name, double lo, double hi, std::size_t n, Spacing s = Spacing::Linear) {
    SweepAxis a;
    a.name = name;
    a.min = lo;
    a.max = hi;
    a.count = n;
    a.spacing = s;
    return a;
}

std::string csv(const Dataset& d) {
    std::ostringstream out;
    write_csv(out, d);
    return out.str();
}

/// Rows of a long-format table with a given first-column value.
std::vector<std::vector<double>> rows_where(const Dataset& d, std::size_t col, double v) {
    std::vector<std::vector<double>> out;
    for (const auto& r : d.rows) {
        if (r[col] == v) out.push_back(r);
    }
    return out;
}
}  // namespace

TEST_CASE("axis values") {
    const auto lin = range("J", 0.0, 1.0, 5).values();
    CHECK(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    const auto lg = range("r", 0.01, 1000.0, 6, Spacing::Log).values();
    REQUIRE(lg.size() == 6);
    CHECK(lg.front() == 0.01);
    CHECK(lg[2] == Approx(1.0).epsilon(1e-15));
    CHECK(lg.back() == 1000.0);
    CHECK(list("phi", {3.0, 1.0}).values() == std::vector<double>{3.0, 1.0});
    CHECK(list("phi", {3.0, 1.0}).size() == 2);
}

TEST_CASE("sweep specification checks") {
    SweepSpec s;
    s.base = baseline_preset();
    CHECK_NOTHROW(s.validate());
    s.axes = {range("J", 0.0, 1.0, 1)};
    CHECK_THROWS_AS(s.validate(), InvalidParameter);
    s.axes = {range("J", 1.0, 0.0, 3)};
    CHECK_THROWS_AS(s.validate(), InvalidParameter);
    s.axes = {range("r", 0.0, 1.0, 3, Spacing::Log)};
    CHECK_THROWS_AS(s.validate(), InvalidParameter);
    s.axes = {range("nonsense", 0.0, 1.0, 3)};
    CHECK_THROWS(s.validate());
    s.axes = {range("J", 0.0, 1.0, 2), range("phi", 0.0, 1.0, 2), range("r", 1.0, 2.0, 2)};
    CHECK_THROWS_AS(s.validate(), InvalidParameter);
    s.axes.clear();
    s.nonreciprocal_lock = s.ep_lock = true;
    CHECK_THROWS_AS(s.validate(), InvalidParameter);
    s.ep_lock = false;
    s.outputs.trajectory = true;
    s.evaluation = Evaluation::Steady;
    CHECK_THROWS_AS(s.validate(), InvalidParameter);
    CHECK(sweep_model_from_string("both") == SweepModel::Both);
    CHECK_THROWS(sweep_model_from_string("neither"));
}

TEST_CASE("axis assignment") {
    SystemParams p = baseline_preset();
    apply_axis_value(p, "r", 10.0);
    CHECK(p.kappa_b == Approx(0.03));
    apply_axis_value(p, "delta_b", 0.02);
    CHECK(p.delta_b == 0.02);
    CHECK_THROWS(apply_axis_value(p, "x", 1.0));
}

TEST_CASE("single-point sweeps") {
    SweepSpec s;
    s.base = baseline_preset();
    s.integrator.rtol = 1e-11;
    s.integrator.atol = 1e-14;
    const SweepResult r = run_sweep(s);
    REQUIRE(r.records.size() == 1);
    REQUIRE(r.all_ok());
    CHECK(r.records[0].scalars[0] == Approx(64.4975).epsilon(1e-5));

    s.evaluation = Evaluation::Steady;
    CHECK(run_sweep(s).records[0].scalars[0] == Approx(74.88).epsilon(1e-4));

    s.base.epsilon = 0.0;
    s.outputs.e_a = s.outputs.eta = true;
    const SweepResult z = run_sweep(s);
    for (double v : z.records[0].scalars) CHECK(v == 0.0);
}

TEST_CASE("grid sweeps produce one row per point") {
    SweepSpec s;
    s.base = baseline_preset();
    s.axes = {range("delta_b", -0.02, 0.02, 3), list("r", {1.0, 10.0})};
    s.evaluation = Evaluation::Steady;
    const Dataset d = run_sweep(s).table();
    CHECK(d.rows.size() == 6);
    CHECK(d.columns == std::vector<std::string>{"delta_b", "r", "J", "e_b"});
    // row-major: second axis varies fastest
    CHECK(d.rows[0][0] == -0.02);
    CHECK(d.rows[0][1] == 1.0);
    CHECK(d.rows[1][1] == 10.0);

    s.model = SweepModel::Both;
    const Dataset both = run_sweep(s).table();
    CHECK(both.columns == std::vector<std::string>{"delta_b", "r", "J", "e_b_eff", "e_b_full"});
    for (const auto& row : both.rows) CHECK(row[4] == Approx(row[3]).epsilon(0.05));

    SweepSpec t;
    t.base = baseline_preset();
    t.axes = {list("delta_b", {0.0, 0.1})};
    t.outputs.trajectory = true;
    t.outputs.power = true;
    t.t_end = 10.0;
    t.samples = 11;
    const Dataset lt = run_sweep(t).table();
    CHECK(lt.columns == std::vector<std::string>{"delta_b", "J", "t", "e_b", "power"});
    CHECK(lt.rows.size() == 22);
}

TEST_CASE("locks") {
    SweepSpec s;
    s.base = baseline_preset();
    s.base.J = 0.3;  // overwritten by either lock
    s.evaluation = Evaluation::Steady;
    s.axes = {range("delta_b", -0.05, 0.05, 11)};
    s.ep_lock = true;
    const SweepResult r = run_sweep(s);
    for (const auto& rec : r.records) {
        const bool outside = std::abs(rec.point[0]) > 0.04 + 1e-12;
        CHECK((rec.status == PointStatus::EpInfeasible) == outside);
        if (!outside) CHECK(rec.J == Approx(0.5 * std::sqrt(std::max(0.0, 0.0016 - rec.point[0] * rec.point[0]))).scale(1e-9));
    }
    CHECK_FALSE(r.all_ok());
    const Dataset d = r.table();
    CHECK(d.status.front() == "ep_infeasible");
    CHECK(std::isnan(d.rows.front()[1]));

    s.ep_lock = false;
    s.nonreciprocal_lock = true;
    const SweepResult n = run_sweep(s);
    CHECK(n.all_ok());
    for (const auto& rec : n.records) CHECK(rec.J == Approx(0.02));

    // a pinned phase that cannot be nonreciprocal
    SweepSpec p = s;
    p.axes = {list("phi", {std::numbers::pi / 2.0, 1.0})};
    const SweepResult pr = run_sweep(p);
    CHECK(pr.records[0].status == PointStatus::Ok);
    CHECK(pr.records[1].status == PointStatus::NrInfeasible);
}

TEST_CASE("bad points are reported, not fatal") {
    SweepSpec s;
    s.base = baseline_preset();
    s.evaluation = Evaluation::Steady;
    s.axes = {list("kappa_b", {0.003, -0.5})};
    const SweepResult r = run_sweep(s);
    CHECK(r.records[0].status == PointStatus::Ok);
    CHECK(r.records[1].status == PointStatus::Failed);
    CHECK_FALSE(r.records[1].message.empty());
}

TEST_CASE("sweeps are deterministic across runs and thread counts") {
    SweepSpec s;
    s.base = baseline_preset();
    s.axes = {range("r", 0.1, 10.0, 5, Spacing::Log), list("delta_b", {0.0, 0.01})};
    s.outputs.e_a = s.outputs.eta = true;
    s.t_end = 100.0;
    s.samples = 101;
    const std::string one = csv(run_sweep(s).table());
    CHECK(csv(run_sweep(s).table()) == one);
    s.threads = 3;
    CHECK(csv(run_sweep(s).table()) == one);
}

TEST_CASE("figure 2") {
    const Dataset a = figure("fig2a");
    CHECK(a.columns == std::vector<std::string>{"delta_b", "J", "t", "jt", "e_b"});
    const auto zero = rows_where(a, 0, 0.0);
    REQUIRE(zero.size() == 2001);
    CHECK(zero.back()[2] == 1000.0);
    CHECK(zero.back()[3] == Approx(20.0));
    CHECK(zero.back()[4] == Approx(74.9).epsilon(0.015));
    CHECK(rows_where(a, 0, 0.1).back()[4] == Approx(3.31).epsilon(0.02));
    CHECK(a.meta["parameters"]["J"] == 0.02);

    const Dataset d = figure("fig2d");
    double peak = 0.0;
    for (const auto& r : rows_where(d, 0, 0.01)) peak = std::max(peak, r[4]);
    CHECK(peak == Approx(0.486).epsilon(0.1));

    CHECK(figure("fig2c").meta.contains("notes"));
    CHECK_THROWS(figure("fig2z"));
    CHECK_THROWS(figure("fig9a"));
}

TEST_CASE("figure 3 steady maps") {
    const Dataset c = figure("fig3c");
    REQUIRE(c.rows.size() == 101);
    const std::size_t eb = c.column("e_b");
    CHECK(c.rows[40][0] == Approx(1.0).epsilon(1e-12));  // 10^(−2 + 40·5/100)
    CHECK(c.rows[40][eb] == Approx(74.88).epsilon(1e-3));
    CHECK(c.rows.back()[eb] < 0.1);
    for (std::size_t k = 1; k < c.rows.size(); ++k) CHECK(c.rows[k][eb] < c.rows[k - 1][eb]);
    CHECK(c.meta["evaluation"] == "steady");
}

TEST_CASE("figure 4 comparisons") {
    const Dataset a = figure("fig4a");
    CHECK(a.columns == std::vector<std::string>{"r", "j_nor", "e_b_nor", "j_ep", "e_b_ep", "diff"});
    REQUIRE(a.rows.size() == 41);
    const auto& mid = a.rows[20];
    CHECK(mid[0] == Approx(1.0).epsilon(1e-12));
    CHECK(mid[3] == Approx(mid[1]).epsilon(1e-9));
    CHECK(std::abs(mid[5]) < 1e-6 * mid[2]);
    CHECK(a.meta.contains("curves"));

    const Dataset b = figure("fig4b");
    REQUIRE(b.rows.size() == 81);
    CHECK(b.rows[40][0] == 0.0);
    CHECK(std::abs(b.rows[40][5]) < 1e-6 * b.rows[40][2]);
    for (const auto& r : b.rows) {
        if (r[0] == Approx(0.02) || r[0] == Approx(-0.02)) CHECK(r[4] >= r[2]);
    }
    for (const auto& s : b.status) CHECK(s == "ok");

    FigureOptions full;
    full.model = SweepModel::Both;
    const Dataset af = figure("fig4a", full);
    for (std::size_t k = 0; k < af.rows.size(); ++k) {
        CHECK(af.rows[k][2] == Approx(a.rows[k][2]).epsilon(1e-12));
    }
}

TEST_CASE("full and effective steady maps agree") {
    SweepSpec s;
    s.base = baseline_preset();
    s.axes = {range("r", 0.1, 10.0, 5, Spacing::Log)};
    s.evaluation = Evaluation::Steady;
    s.model = SweepModel::Both;
    const Dataset d = run_sweep(s).table();
    for (const auto& row : d.rows) CHECK(row[3] == Approx(row[2]).epsilon(0.05));
}

TEST_CASE("figure metadata") {
    const Dataset d = figure("fig3f");
    for (const char* key : {"version", "timestamp", "parameters", "effective", "axes", "model", "evaluation",
                            "t_end", "samples", "tolerances"}) {
        CHECK(d.meta.contains(key));
    }
    CHECK(d.meta["axes"][0]["name"] == "r");
    CHECK(figure_names().size() == 12);
}
