#include "nrqb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "nrqb/analytic.hpp"
#include "nrqb/config.hpp"
#include "nrqb/dynamics.hpp"
#include "nrqb/error.hpp"
#include "nrqb/spectrum.hpp"

namespace nrqb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ModelSlot {
    ModelKind kind;
    std::string suffix;
};

std::vector<ModelSlot> model_slots(SweepModel m) {
    switch (m) {
        case SweepModel::Effective: return {{ModelKind::Effective, ""}};
        case SweepModel::Full: return {{ModelKind::Full, ""}};
        case SweepModel::Both: return {{ModelKind::Effective, "_eff"}, {ModelKind::Full, "_full"}};
    }
    return {};
}

std::vector<std::string> observable_names(const SweepOutputs& o, bool all_if_none) {
    std::vector<std::string> names;
    if (o.e_a) names.push_back("e_a");
    if (o.e_b) names.push_back("e_b");
    if (o.eta) names.push_back("eta");
    if (o.power) names.push_back("power");
    if (names.empty() && all_if_none) names = {"e_a", "e_b", "eta", "power"};
    return names;
}

double pick(const std::string& obs, double e_a, double e_b, double eta, double power) {
    if (obs == "e_a") return e_a;
    if (obs == "e_b") return e_b;
    if (obs == "eta") return eta;
    return power;
}

const std::vector<double>& pick_series(const std::string& obs, const Trajectory& t) {
    if (obs == "e_a") return t.e_a;
    if (obs == "e_b") return t.e_b;
    if (obs == "eta") return t.eta;
    return t.power;
}

struct Layout {
    std::vector<ModelSlot> slots;
    std::vector<std::string> observables;
};

void evaluate_point(const SweepSpec& spec, const Layout& layout, SweepRecord& rec) {
    SystemParams p = spec.base;
    for (std::size_t k = 0; k < spec.axes.size(); ++k) {
        apply_axis_value(p, spec.axes[k].name, rec.point[k]);
    }
    p = validated(p);
    EffectiveParams e = reduce_to_effective(p);

    if (spec.nonreciprocal_lock) {
        const bool phi_swept = std::any_of(spec.axes.begin(), spec.axes.end(),
                                           [](const SweepAxis& a) { return a.name == "phi"; });
        const NonreciprocalSolution nr =
            solve_nonreciprocal(e, phi_swept ? std::optional<double>(p.phi) : std::nullopt);
        p.J = nr.J;
        p.phi = nr.phi;
    } else if (spec.ep_lock) {
        const EpVariable free[] = {EpVariable::J};
        const auto sols = solve_ep(e, free);
        double J = sols.front().values.front().second;
        for (const auto& s : sols) {
            if (s.values.front().second > 0.0) {
                J = s.values.front().second;
                break;
            }
        }
        p.J = J;
    }
    p = validated(p);
    e = reduce_to_effective(p);
    rec.J = p.J;
    rec.phi = p.phi;

    const std::size_t nobs = layout.observables.size();
    if (spec.outputs.trajectory) {
        rec.times = uniform_grid(spec.t_end, spec.samples);
        rec.series.assign(layout.slots.size() * nobs, {});
    }
    rec.scalars.assign(layout.slots.size() * nobs, kNaN);

    for (std::size_t s = 0; s < layout.slots.size(); ++s) {
        const bool full = layout.slots[s].kind == ModelKind::Full;
        if (spec.evaluation == Evaluation::Steady) {
            double e_a = 0.0, e_b = 0.0;
            if (full) {
                const SteadyState st = full_steady_state(rate_matched_three_mode(p));
                e_a = st.e_a;
                e_b = st.e_b;
            } else {
                const SteadyEnergies st = steady_energies(e);
                e_a = st.e_a;
                e_b = st.e_b;
            }
            for (std::size_t o = 0; o < nobs; ++o) {
                rec.scalars[s * nobs + o] =
                    pick(layout.observables[o], e_a, e_b, efficiency(e_a, e_b), 0.0);
            }
            continue;
        }
        const std::vector<double> grid =
            rec.times.empty() ? uniform_grid(spec.t_end, spec.samples) : rec.times;
        const Trajectory traj =
            full ? integrate(rate_matched_three_mode(p), MomentState::vacuum(3), grid, spec.integrator)
                 : integrate(e, MomentState::vacuum(2), grid, spec.integrator);
        const std::size_t last = traj.size() - 1;
        for (std::size_t o = 0; o < nobs; ++o) {
            const std::string& obs = layout.observables[o];
            rec.scalars[s * nobs + o] =
                pick(obs, traj.e_a[last], traj.e_b[last], traj.eta[last], traj.power[last]);
            if (spec.outputs.trajectory) rec.series[s * nobs + o] = pick_series(obs, traj);
        }
    }
    for (double v : rec.scalars) {
        if (!std::isfinite(v)) throw Error("non-finite output");
    }
}

}  // namespace

std::string to_string(Spacing s) { return s == Spacing::Linear ? "linear" : "log"; }

std::string to_string(SweepModel m) {
    switch (m) {
        case SweepModel::Effective: return "effective";
        case SweepModel::Full: return "full";
        case SweepModel::Both: return "both";
    }
    return "?";
}

std::string to_string(Evaluation e) { return e == Evaluation::Steady ? "steady" : "trajectory"; }

std::string to_string(PointStatus s) {
    switch (s) {
        case PointStatus::Ok: return "ok";
        case PointStatus::EpInfeasible: return "ep_infeasible";
        case PointStatus::Unstable: return "unstable";
        case PointStatus::NrInfeasible: return "nr_infeasible";
        case PointStatus::Failed: return "failed";
    }
    return "?";
}

SweepModel sweep_model_from_string(const std::string& s) {
    if (s == "effective") return SweepModel::Effective;
    if (s == "full") return SweepModel::Full;
    if (s == "both") return SweepModel::Both;
    throw InvalidParameter("model must be effective, full or both, got '" + s + "'");
}

std::vector<double> SweepAxis::values() const {
    if (!explicit_values.empty()) return explicit_values;
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double u = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        v[k] = spacing == Spacing::Linear
                   ? min + (max - min) * u
                   : std::pow(10.0, std::log10(min) + (std::log10(max) - std::log10(min)) * u);
    }
    v.front() = min;
    if (count > 1) v.back() = max;
    return v;
}

std::size_t SweepAxis::size() const {
    return explicit_values.empty() ? count : explicit_values.size();
}

void SweepSpec::validate() const {
    if (axes.size() > 2) throw InvalidParameter("at most two sweep axes");
    for (const auto& a : axes) {
        if (a.name != "r") (void)get_field(SystemParams{}, a.name);
        if (!a.explicit_values.empty()) {
            for (double v : a.explicit_values) {
                if (!std::isfinite(v)) throw InvalidParameter("axis '" + a.name + "' has non-finite values");
            }
            continue;
        }
        if (a.count < 2) throw InvalidParameter("axis '" + a.name + "' needs count >= 2");
        if (!(a.min < a.max)) throw InvalidParameter("axis '" + a.name + "' needs min < max");
        if (a.spacing == Spacing::Log && !(a.min > 0.0)) {
            throw InvalidParameter("log axis '" + a.name + "' needs min > 0");
        }
    }
    if (axes.size() == 2 && axes[0].name == axes[1].name) {
        throw InvalidParameter("the two sweep axes must differ");
    }
    if (nonreciprocal_lock && ep_lock) {
        throw InvalidParameter("nonreciprocal_lock and ep_lock are mutually exclusive");
    }
    if (evaluation == Evaluation::Trajectory) {
        if (!(t_end > 0.0)) throw InvalidParameter("t_end must be > 0");
        if (samples < 2) throw InvalidParameter("samples must be >= 2");
    } else if (outputs.trajectory) {
        throw InvalidParameter("trajectory output needs trajectory evaluation");
    }
}

void apply_axis_value(SystemParams& p, const std::string& name, double value) {
    if (name == "r") {
        p.kappa_b = value * p.kappa_a;
        return;
    }
    set_field(p, name, value);
}

bool SweepResult::all_ok() const {
    return std::all_of(records.begin(), records.end(),
                       [](const SweepRecord& r) { return r.status == PointStatus::Ok; });
}

Dataset SweepResult::table(const std::string& name) const {
    Dataset d;
    d.name = name;
    d.columns = axis_names;
    d.columns.push_back("J");
    if (long_format) {
        d.columns.push_back("t");
        d.columns.insert(d.columns.end(), series_columns.begin(), series_columns.end());
    } else {
        d.columns.insert(d.columns.end(), scalar_columns.begin(), scalar_columns.end());
    }
    for (const auto& rec : records) {
        std::vector<double> head = rec.point;
        head.push_back(rec.status == PointStatus::Ok ? rec.J : kNaN);
        if (!long_format) {
            head.insert(head.end(), rec.scalars.begin(), rec.scalars.end());
            head.resize(d.columns.size(), kNaN);
            d.rows.push_back(std::move(head));
            d.status.push_back(to_string(rec.status));
            continue;
        }
        if (rec.status != PointStatus::Ok) {
            head.resize(d.columns.size(), kNaN);
            d.rows.push_back(std::move(head));
            d.status.push_back(to_string(rec.status));
            continue;
        }
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
            std::vector<double> row = head;
            row.push_back(rec.times[k]);
            for (const auto& s : rec.series) row.push_back(s[k]);
            d.rows.push_back(std::move(row));
            d.status.push_back("ok");
        }
    }
    return d;
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    Layout layout;
    layout.slots = model_slots(spec.model);
    layout.observables = observable_names(spec.outputs, spec.outputs.trajectory);

    SweepResult res;
    res.long_format = spec.outputs.trajectory;
    for (const auto& a : spec.axes) res.axis_names.push_back(a.name);
    for (const auto& slot : layout.slots) {
        for (const auto& obs : layout.observables) {
            (res.long_format ? res.series_columns : res.scalar_columns).push_back(obs + slot.suffix);
        }
    }

    std::vector<std::vector<double>> axis_values;
    for (const auto& a : spec.axes) axis_values.push_back(a.values());
    std::size_t total = 1;
    for (const auto& v : axis_values) total *= v.size();

    res.records.resize(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        auto& point = res.records[idx].point;
        point.resize(axis_values.size());
        for (std::size_t k = axis_values.size(); k-- > 0;) {
            point[k] = axis_values[k][rem % axis_values[k].size()];
            rem /= axis_values[k].size();
        }
    }

    auto work = [&](SweepRecord& rec) {
        try {
            evaluate_point(spec, layout, rec);
            rec.status = PointStatus::Ok;
        } catch (const NoRealSolution& ex) {
            rec.status = PointStatus::EpInfeasible;
            rec.message = ex.what();
        } catch (const NonConvergence& ex) {
            rec.status = spec.ep_lock ? PointStatus::EpInfeasible : PointStatus::Failed;
            rec.message = ex.what();
        } catch (const UnstableSystem& ex) {
            rec.status = PointStatus::Unstable;
            rec.message = ex.what();
        } catch (const IncompatiblePhase& ex) {
            rec.status = PointStatus::NrInfeasible;
            rec.message = ex.what();
        } catch (const std::exception& ex) {
            rec.status = PointStatus::Failed;
            rec.message = ex.what();
        }
        if (rec.status != PointStatus::Ok) {
            rec.scalars.assign(res.scalar_columns.size(), kNaN);
            rec.times.clear();
            rec.series.clear();
        }
    };

    unsigned threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : spec.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        for (auto& rec : res.records) work(rec);
        return res;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < total; i = next++) work(res.records[i]);
        });
    }
    pool.clear();  // joins
    return res;
}

// ---------------------------------------------------------------- figures --

namespace {

constexpr double kFigJ = 0.02;  // Γ/2 at the baseline

SweepSpec figure_spec(const FigureOptions& opts) {
    SweepSpec s;
    s.base = baseline_preset();
    s.model = opts.model;
    s.threads = opts.threads;
    s.integrator = opts.integrator;
    s.samples = 2001;
    return s;
}

SweepAxis list_axis(const std::string& name, std::vector<double> values) {
    SweepAxis a;
    a.name = name;
    a.explicit_values = std::move(values);
    return a;
}

SweepAxis range_axis(const std::string& name, double lo, double hi, std::size_t n, Spacing sp) {
    SweepAxis a;
    a.name = name;
    a.min = lo;
    a.max = hi;
    a.count = n;
    a.spacing = sp;
    return a;
}

nlohmann::json axes_json(const std::vector<SweepAxis>& axes) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : axes) {
        nlohmann::json j = {{"name", a.name}};
        if (a.explicit_values.empty()) {
            j["min"] = a.min;
            j["max"] = a.max;
            j["count"] = a.count;
            j["spacing"] = to_string(a.spacing);
        } else {
            j["values"] = a.explicit_values;
        }
        out.push_back(j);
    }
    return out;
}

nlohmann::json sweep_meta(const SweepSpec& s) {
    return {
        {"version", library_version()},
        {"timestamp", utc_timestamp()},
        {"parameters", to_json(validated(s.base))},
        {"effective", to_json(reduce_to_effective(validated(s.base)))},
        {"axes", axes_json(s.axes)},
        {"model", to_string(s.model)},
        {"evaluation", to_string(s.evaluation)},
        {"t_end", s.t_end},
        {"samples", s.samples},
        {"nonreciprocal_lock", s.nonreciprocal_lock},
        {"ep_lock", s.ep_lock},
        {"tolerances", to_json(s.integrator)},
    };
}

/// Sweep table plus a Jt column right after t.
Dataset time_figure(const std::string& name, const SweepSpec& spec) {
    Dataset d = run_sweep(spec).table(name);
    const std::size_t tcol = d.column("t");
    const std::size_t jcol = d.column("J");
    d.columns.insert(d.columns.begin() + static_cast<std::ptrdiff_t>(tcol) + 1, "jt");
    for (auto& row : d.rows) {
        row.insert(row.begin() + static_cast<std::ptrdiff_t>(tcol) + 1, row[jcol] * row[tcol]);
    }
    d.meta = sweep_meta(spec);
    return d;
}

Dataset steady_figure(const std::string& name, const SweepSpec& spec) {
    Dataset d = run_sweep(spec).table(name);
    d.meta = sweep_meta(spec);
    return d;
}

}  // namespace

std::vector<std::string> figure_names() {
    return {"fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c",
            "fig3d", "fig3e", "fig3f", "fig4a", "fig4b"};
}

Dataset figure(const std::string& name, const FigureOptions& opts) {
    if (name.size() == 5 && name.compare(0, 3, "fig") == 0) {
        switch (name[3]) {
            case '2': return figure2(name[4], opts);
            case '3': return figure3(name[4], opts);
            case '4': return figure4(name[4], opts);
            default: break;
        }
    }
    throw InvalidParameter("unknown figure '" + name + "'");
}

Dataset figure2(char variant, const FigureOptions& opts) {
    SweepSpec s = figure_spec(opts);
    s.outputs = {};
    s.outputs.e_b = false;
    s.outputs.trajectory = true;
    const std::vector<double> detunings = {0.0, 0.01, 0.1};
    switch (variant) {
        case 'a':
            s.axes = {list_axis("delta_b", detunings)};
            s.outputs.e_b = true;
            s.t_end = 20.0 / kFigJ;
            break;
        case 'b':
            s.axes = {list_axis("delta_b", detunings)};
            s.outputs.eta = true;
            s.t_end = 20.0 / kFigJ;
            break;
        case 'c': {
            const double pi = std::numbers::pi;
            s.axes = {list_axis("phi", {pi / 2.0, pi / 3.0, pi / 4.0})};
            s.outputs.e_b = true;
            s.t_end = 20.0 / kFigJ;
            break;
        }
        case 'd':
            s.axes = {list_axis("delta_b", detunings)};
            s.outputs.power = true;
            s.t_end = 5.0 / kFigJ;
            break;
        default: throw InvalidParameter(std::string("unknown figure 2 variant '") + variant + "'");
    }
    Dataset d = time_figure(std::string("fig2") + variant, s);
    if (variant == 'c') {
        d.meta["notes"] = "phase values are representative off-nonreciprocal choices; J stays at Gamma/2";
    }
    return d;
}

Dataset figure3(char variant, const FigureOptions& opts) {
    SweepSpec s = figure_spec(opts);
    s.outputs = {};
    s.outputs.e_b = false;
    const SweepAxis r_map = range_axis("r", 1e-2, 1e3, 31, Spacing::Log);
    switch (variant) {
        case 'a':
        case 'b':
            s.axes = {r_map};
            s.outputs.trajectory = true;
            (variant == 'a' ? s.outputs.e_b : s.outputs.eta) = true;
            s.t_end = 10.0 / kFigJ;
            break;
        case 'c':
        case 'd':
            s.axes = {range_axis("r", 1e-2, 1e3, 101, Spacing::Log)};
            s.evaluation = Evaluation::Steady;
            (variant == 'c' ? s.outputs.e_b : s.outputs.eta) = true;
            return steady_figure(std::string("fig3") + variant, s);
        case 'e':
            s.axes = {r_map};
            s.outputs.trajectory = true;
            s.outputs.power = true;
            s.t_end = 5.0 / kFigJ;
            break;
        case 'f':
            s.axes = {list_axis("r", {0.1, 1.0, 10.0})};
            s.outputs.trajectory = true;
            s.outputs.power = true;
            s.t_end = 5.0 / kFigJ;
            break;
        default: throw InvalidParameter(std::string("unknown figure 3 variant '") + variant + "'");
    }
    return time_figure(std::string("fig3") + variant, s);
}

Dataset figure4(char variant, const FigureOptions& opts) {
    SweepSpec s = figure_spec(opts);
    s.outputs = {};
    s.outputs.e_b = true;
    s.evaluation = Evaluation::Steady;
    std::string axis_label;
    if (variant == 'a') {
        s.axes = {range_axis("r", 0.1, 10.0, 41, Spacing::Log)};
        axis_label = "r";
    } else if (variant == 'b') {
        s.axes = {range_axis("delta_b", -0.04, 0.04, 81, Spacing::Linear)};
        axis_label = "delta";
    } else {
        throw InvalidParameter(std::string("unknown figure 4 variant '") + variant + "'");
    }

    SweepSpec nor = s;
    nor.nonreciprocal_lock = true;
    SweepSpec ep = s;
    ep.ep_lock = true;
    const SweepResult rn = run_sweep(nor);
    const SweepResult re = run_sweep(ep);

    const bool both = s.model == SweepModel::Both;
    const std::string eb_col = both ? "e_b_eff" : "e_b";
    const std::size_t eb = [&] {
        for (std::size_t k = 0; k < rn.scalar_columns.size(); ++k) {
            if (rn.scalar_columns[k] == eb_col) return k;
        }
        return std::size_t{0};
    }();

    Dataset d;
    d.name = std::string("fig4") + variant;
    d.columns = {axis_label, "j_nor", "e_b_nor", "j_ep", "e_b_ep", "diff"};
    for (std::size_t k = 0; k < rn.records.size(); ++k) {
        const SweepRecord& a = rn.records[k];
        const SweepRecord& b = re.records[k];
        const bool a_ok = a.status == PointStatus::Ok;
        const bool b_ok = b.status == PointStatus::Ok;
        const double en = a_ok ? a.scalars[eb] : kNaN;
        const double ee = b_ok ? b.scalars[eb] : kNaN;
        d.rows.push_back({a.point[0], a_ok ? a.J : kNaN, en, b_ok ? b.J : kNaN, ee, ee - en});
        d.status.push_back(a_ok ? to_string(b.status) : to_string(a.status));
    }
    d.meta = sweep_meta(s);
    d.meta["curves"] = {{"nor", "nonreciprocal lock, J = Gamma/2"},
                        {"ep", "exceptional-point lock, J = J_EP"}};
    if (variant == 'b') d.meta["notes"] = "delta is the battery detuning delta_b; r = 1";
    return d;
}

}  // namespace nrqb
