// nrqb — command-line front end.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nrqb/acceptance.hpp"
#include "nrqb/analytic.hpp"
#include "nrqb/config.hpp"
#include "nrqb/dynamics.hpp"
#include "nrqb/error.hpp"
#include "nrqb/experiments.hpp"
#include "nrqb/io.hpp"
#include "nrqb/spectrum.hpp"

namespace fs = std::filesystem;
using namespace nrqb;

namespace {

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kPartial = 2;

struct Common {
    std::string preset;
    std::string config;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    double rtol = 1e-9;
    double atol = 1e-12;
    std::string method = "dopri5";
};

void add_common(CLI::App* cmd, Common& c) {
    auto* pre = cmd->add_option("--preset", c.preset, "parameter preset (baseline, superconducting)");
    auto* cfg = cmd->add_option("--config", c.config, "flat key = value parameter file");
    pre->excludes(cfg);
    cfg->excludes(pre);
    cmd->add_option("--out-dir", c.out_dir, "directory for every written file")->capture_default_str();
    cmd->add_option("--set", c.overrides, "override one parameter, key=value (repeatable)");
    cmd->add_option("--rtol", c.rtol, "integrator relative tolerance")->capture_default_str();
    cmd->add_option("--atol", c.atol, "integrator absolute tolerance")->capture_default_str();
    cmd->add_option("--method", c.method, "integrator: dopri5 or rk4")
        ->check(CLI::IsMember({"dopri5", "rk4"}))
        ->capture_default_str();
}

SystemParams resolve(const Common& c) {
    SystemParams p = c.config.empty() ? preset(c.preset.empty() ? "baseline" : c.preset)
                                      : load_config(c.config);
    for (const auto& o : c.overrides) apply_assignment(p, o);
    return validated(p);
}

std::string source_of(const Common& c) {
    if (!c.config.empty()) return "config:" + c.config;
    return "preset:" + (c.preset.empty() ? std::string("baseline") : c.preset);
}

IntegratorOptions integrator(const Common& c) {
    IntegratorOptions o;
    o.rtol = c.rtol;
    o.atol = c.atol;
    if (c.method == "rk4") o.method = StepMethod::ClassicalRk4;
    return o;
}

nlohmann::json base_meta(const Common& c, const SystemParams& p) {
    return {
        {"version", library_version()},
        {"timestamp", utc_timestamp()},
        {"source", source_of(c)},
        {"overrides", c.overrides},
        {"parameters", to_json(p)},
        {"effective", to_json(reduce_to_effective(p))},
        {"tolerances", to_json(integrator(c))},
    };
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_trajectory(const fs::path& dir, const std::string& name, const Trajectory& t,
                      nlohmann::json meta) {
    fs::create_directories(dir);
    std::ostringstream csv;
    write_trajectory_csv(csv, t);
    write_text(dir / (name + ".csv"), csv.str());
    meta["name"] = name;
    meta["rows"] = t.size();
    write_json(dir / (name + ".meta.json"), meta);
}

void kv(std::ostream& out, const std::string& key, const std::string& value) {
    out << "  " << key << std::string(key.size() < 22 ? 22 - key.size() : 1, ' ') << value << '\n';
}

std::string num(double v) { return format_double(v); }
std::string cnum(cplx v) { return num(v.real()) + (v.imag() < 0 ? " - " : " + ") + num(std::abs(v.imag())) + "i"; }

// ------------------------------------------------------------------ reduce --

int cmd_reduce(const Common& c, bool json) {
    const SystemParams p = resolve(c);
    const EffectiveParams e = reduce_to_effective(p);
    const RegimeReport rep = validate_adiabatic(p);
    const CouplingAmplitudes amp = coupling_amplitudes(e);
    std::cout << "effective parameters (" << source_of(c) << ")\n";
    kv(std::cout, "delta_a'", num(e.delta_a_p));
    kv(std::cout, "delta_b'", num(e.delta_b_p));
    kv(std::cout, "Gamma_a", num(e.gamma_a_eff));
    kv(std::cout, "Gamma_b", num(e.gamma_b_eff));
    kv(std::cout, "G", num(e.g_coh));
    kv(std::cout, "Gamma", num(e.gamma_diss));
    kv(std::cout, "Lambda_a", num(e.lambda_a));
    kv(std::cout, "Lambda_b", num(e.lambda_b));
    kv(std::cout, "J", num(e.J));
    kv(std::cout, "J+", cnum(e.j_plus));
    kv(std::cout, "J-", cnum(e.j_minus));
    kv(std::cout, "phi", num(e.phi));
    kv(std::cout, "isolation |b->a|/|a->b|", num(amp.isolation_ratio));
    kv(std::cout, "nonreciprocal residual", num(nonreciprocal_residual(e)));
    std::cout << "adiabatic regime: " << (rep.ok() ? "ok" : "WARNING") << '\n';
    kv(std::cout, "decay margin", num(rep.decay_margin) + (rep.decay_ok ? "" : "  (< threshold)"));
    kv(std::cout, "coupling margin",
       num(rep.coupling_margin) + (rep.coupling_ok ? "" : "  (< threshold)"));
    if (json) {
        nlohmann::json j = base_meta(c, p);
        j.erase("tolerances");
        j["adiabatic"] = {{"ok", rep.ok()},
                          {"decay_margin", rep.decay_margin},
                          {"coupling_margin", rep.coupling_margin}};
        j["isolation_ratio"] = amp.isolation_ratio;
        write_json(fs::path(c.out_dir) / "reduce.json", j);
    }
    return kOk;
}

// ---------------------------------------------------------------- simulate --

int cmd_simulate(const Common& c, const std::string& model, double t_end, std::size_t samples) {
    const SystemParams p = resolve(c);
    const SweepModel m = sweep_model_from_string(model);
    const auto grid = uniform_grid(t_end, samples);
    const IntegratorOptions opts = integrator(c);
    nlohmann::json meta = base_meta(c, p);
    meta["t_end"] = t_end;
    meta["samples"] = samples;
    const fs::path dir = c.out_dir;

    std::optional<Trajectory> eff, full;
    if (m != SweepModel::Full) {
        eff = integrate(reduce_to_effective(p), MomentState::vacuum(2), grid, opts);
        meta["model"] = "effective";
        write_trajectory(dir, "trajectory_effective", *eff, meta);
        std::cout << "effective: E_A " << num(eff->e_a.back()) << ", E_B " << num(eff->e_b.back())
                  << ", eta " << num(eff->eta.back()) << " at t = " << num(t_end) << '\n';
    }
    if (m != SweepModel::Effective) {
        const SystemParams pf = rate_matched_three_mode(p);
        full = integrate(pf, MomentState::vacuum(3), grid, opts);
        meta["model"] = "full";
        meta["three_mode_parameters"] = to_json(pf);
        write_trajectory(dir, "trajectory_full", *full, meta);
        std::cout << "full:      E_A " << num(full->e_a.back()) << ", E_B "
                  << num(full->e_b.back()) << ", eta " << num(full->eta.back())
                  << " at t = " << num(t_end) << '\n';
    }
    if (eff && full) {
        double num_dev = 0.0, den = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            num_dev = std::max(num_dev, std::abs(full->e_b[k] - eff->e_b[k]));
            den = std::max(den, std::abs(eff->e_b[k]));
        }
        const double traj_dev = den > 0 ? num_dev / den : num_dev;
        nlohmann::json summary = {{"max_rel_dev_e_b", traj_dev},
                                  {"final_e_b_effective", eff->e_b.back()},
                                  {"final_e_b_full", full->e_b.back()}};
        try {
            const double se = steady_energies(reduce_to_effective(p)).e_b;
            const double sf = full_steady_state(rate_matched_three_mode(p)).e_b;
            summary["steady_e_b_effective"] = se;
            summary["steady_e_b_full"] = sf;
            summary["steady_rel_err"] = se != 0.0 ? std::abs(sf - se) / std::abs(se) : 0.0;
        } catch (const UnstableSystem&) {
            summary["steady_e_b_effective"] = nullptr;
        }
        write_json(dir / "comparison.json", summary);
        std::cout << "comparison: max |E_B^full - E_B^eff| / max E_B^eff = " << num(traj_dev)
                  << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------- analytic --

int cmd_analytic(const Common& c, double t_end, std::size_t samples) {
    const SystemParams p = resolve(c);
    const EffectiveParams e = reduce_to_effective(p);
    const Trajectory t = closed_form_trajectory(e, uniform_grid(t_end, samples));
    nlohmann::json meta = base_meta(c, p);
    meta.erase("tolerances");
    meta["model"] = "closed_form";
    meta["t_end"] = t_end;
    meta["samples"] = samples;
    const AnalyticCoefficients co = coefficients(e.lambda_a, e.lambda_b);
    meta["coefficients"] = {{"A1", co.a1}, {"A2", co.a2}, {"A3", co.a3}, {"A4", co.a4},
                            {"equal_rates", co.degenerate.equal_rates},
                            {"half_rate", co.degenerate.half_rate}};
    write_trajectory(c.out_dir, "analytic", t, meta);
    std::cout << "closed form: E_A " << num(t.e_a.back()) << ", E_B " << num(t.e_b.back())
              << ", eta " << num(t.eta.back()) << " at t = " << num(t_end) << '\n';
    return kOk;
}

// ------------------------------------------------------------------ steady --

int cmd_steady(const Common& c, const std::string& model) {
    const SystemParams p = resolve(c);
    const EffectiveParams e = reduce_to_effective(p);
    nlohmann::json out = base_meta(c, p);
    out.erase("tolerances");
    const SweepModel m = sweep_model_from_string(model);
    if (m != SweepModel::Full) {
        const SteadyEnergies s = steady_energies(e);
        std::cout << "effective steady state" << (s.closed_form ? " (closed form)" : "") << '\n';
        kv(std::cout, "E_A", num(s.e_a));
        kv(std::cout, "E_B", num(s.e_b));
        kv(std::cout, "eta", num(s.eta));
        kv(std::cout, "E_B/E_A", num(s.ratio));
        out["effective"] = {{"e_a", s.e_a}, {"e_b", s.e_b}, {"eta", s.eta}, {"ratio", s.ratio},
                            {"closed_form", s.closed_form}};
    }
    if (m != SweepModel::Effective) {
        const SteadyState s = full_steady_state(rate_matched_three_mode(p));
        std::cout << "three-mode steady state\n";
        kv(std::cout, "E_A", num(s.e_a));
        kv(std::cout, "E_B", num(s.e_b));
        kv(std::cout, "eta", num(s.eta));
        out["full"] = {{"e_a", s.e_a}, {"e_b", s.e_b}, {"eta", s.eta}};
    }
    write_json(fs::path(c.out_dir) / "steady.json", out);
    return kOk;
}

// ------------------------------------------------------------------- sweep --

SweepAxis parse_axis(const std::string& text) {
    SweepAxis a;
    if (const auto eq = text.find('='); eq != std::string::npos) {
        a.name = text.substr(0, eq);
        std::stringstream ss(text.substr(eq + 1));
        std::string item;
        while (std::getline(ss, item, ',')) a.explicit_values.push_back(parse_number(item));
        if (a.explicit_values.empty()) throw ConfigError("axis '" + a.name + "' has no values");
        return a;
    }
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 4 && parts.size() != 5) {
        throw ConfigError("axis must be name:min:max:count[:linear|log] or name=v1,v2,..., got '" +
                          text + "'");
    }
    a.name = parts[0];
    a.min = parse_number(parts[1]);
    a.max = parse_number(parts[2]);
    const double count = parse_number(parts[3]);
    if (count < 1 || count != std::floor(count)) throw ConfigError("axis count must be a positive integer");
    a.count = static_cast<std::size_t>(count);
    if (parts.size() == 5) {
        if (parts[4] == "log") a.spacing = Spacing::Log;
        else if (parts[4] != "linear") throw ConfigError("axis spacing must be linear or log");
    }
    return a;
}

SweepOutputs parse_outputs(const std::vector<std::string>& names) {
    SweepOutputs o;
    o.e_b = false;
    for (const auto& n : names) {
        if (n == "E_A" || n == "e_a") o.e_a = true;
        else if (n == "E_B" || n == "e_b") o.e_b = true;
        else if (n == "eta") o.eta = true;
        else if (n == "power") o.power = true;
        else if (n == "trajectory") o.trajectory = true;
        else throw ConfigError("unknown output '" + n + "'");
    }
    if (!o.e_a && !o.e_b && !o.eta && !o.power && !o.trajectory) o.e_b = true;
    return o;
}

struct SweepArgs {
    std::vector<std::string> axes;
    std::vector<std::string> outputs = {"e_b"};
    std::string model = "effective";
    std::string evaluation = "trajectory";
    double t_end = 200.0;
    std::size_t samples = 2001;
    bool nr_lock = false;
    bool ep_lock = false;
    unsigned threads = 1;
    std::string name = "sweep";
};

int cmd_sweep(const Common& c, const SweepArgs& a) {
    SweepSpec s;
    s.base = resolve(c);
    for (const auto& ax : a.axes) s.axes.push_back(parse_axis(ax));
    s.outputs = parse_outputs(a.outputs);
    s.model = sweep_model_from_string(a.model);
    s.evaluation = a.evaluation == "steady" ? Evaluation::Steady : Evaluation::Trajectory;
    s.t_end = a.t_end;
    s.samples = a.samples;
    s.nonreciprocal_lock = a.nr_lock;
    s.ep_lock = a.ep_lock;
    s.threads = a.threads;
    s.integrator = integrator(c);

    const SweepResult res = run_sweep(s);
    Dataset d = res.table(a.name);
    d.meta = base_meta(c, s.base);
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& ax : a.axes) axes.push_back(ax);
    d.meta["axes"] = axes;
    d.meta["outputs"] = a.outputs;
    d.meta["model"] = a.model;
    d.meta["evaluation"] = a.evaluation;
    d.meta["t_end"] = a.t_end;
    d.meta["samples"] = a.samples;
    d.meta["nonreciprocal_lock"] = a.nr_lock;
    d.meta["ep_lock"] = a.ep_lock;
    write_dataset(c.out_dir, d);

    std::size_t bad = 0;
    for (const auto& r : res.records) {
        if (r.status != PointStatus::Ok) {
            ++bad;
            std::cerr << "point";
            for (std::size_t k = 0; k < r.point.size(); ++k) {
                std::cerr << ' ' << res.axis_names[k] << '=' << num(r.point[k]);
            }
            std::cerr << ": " << to_string(r.status) << " (" << r.message << ")\n";
        }
    }
    std::cout << res.records.size() << " points, " << (res.records.size() - bad) << " ok -> "
              << (fs::path(c.out_dir) / (a.name + ".csv")).string() << '\n';
    return bad ? kPartial : kOk;
}

// ---------------------------------------------------------------------- ep --

int cmd_ep(const Common& c, const std::vector<std::string>& free_names, bool newton) {
    const SystemParams p = resolve(c);
    const EffectiveParams e = reduce_to_effective(p);
    std::vector<EpVariable> free;
    for (const auto& n : free_names) free.push_back(ep_variable_from_string(n));
    EpOptions opts;
    opts.force_newton = newton;
    const auto sols = solve_ep(e, free, opts);

    std::ostringstream csv;
    csv << "free_var,value,residual,overlap\n";
    for (const auto& s : sols) {
        std::string vars, vals;
        for (std::size_t k = 0; k < s.values.size(); ++k) {
            vars += (k ? ";" : "") + std::string(to_string(s.values[k].first));
            vals += (k ? ";" : "") + num(s.values[k].second);
        }
        csv << vars << ',' << vals << ',' << num(s.residual) << ',' << num(s.overlap) << '\n';
    }
    std::cout << csv.str();
    write_text(fs::path(c.out_dir) / "ep.csv", csv.str());
    return kOk;
}

// ----------------------------------------------------------------- figures --

int cmd_figures(const Common& c, std::vector<std::string> names, const std::string& model,
                unsigned threads) {
    if (!c.config.empty() || !c.preset.empty() || !c.overrides.empty()) {
        std::cerr << "note: figures use their own fixed parameter sets; parameter flags ignored\n";
    }
    if (names.empty() || (names.size() == 1 && names[0] == "all")) names = figure_names();
    FigureOptions fo;
    fo.model = sweep_model_from_string(model);
    fo.threads = threads;
    fo.integrator = integrator(c);
    int rc = kOk;
    for (const auto& n : names) {
        const Dataset d = figure(n, fo);
        write_dataset(c.out_dir, d);
        const auto bad = std::count_if(d.status.begin(), d.status.end(),
                                       [](const std::string& s) { return s != "ok"; });
        std::cout << n << ": " << d.rows.size() << " rows";
        if (bad) {
            std::cout << ", " << bad << " not ok";
            rc = kPartial;
        }
        std::cout << '\n';
    }
    return rc;
}

// ---------------------------------------------------------------- validate --

int cmd_validate(const Common& c, double scale, bool report) {
    AcceptanceOptions o;
    o.tolerance_scale = scale;
    const auto results = run_acceptance(o);
    std::ostringstream text;
    const bool ok = print_report(text, results);
    std::cout << text.str();
    if (report) write_text(fs::path(c.out_dir) / "validate.txt", text.str());
    return ok ? kOk : kFatal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonreciprocal quantum battery simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    Common common;

    bool reduce_json = false;
    auto* reduce = app.add_subcommand("reduce", "print the effective two-mode parameters");
    add_common(reduce, common);
    reduce->add_flag("--json", reduce_json, "also write reduce.json");

    std::string sim_model = "effective";
    double sim_t_end = 1000.0;
    std::size_t sim_samples = 2001;
    auto* simulate = app.add_subcommand("simulate", "integrate the moment equations from vacuum");
    add_common(simulate, common);
    simulate->add_option("--model", sim_model, "effective, full or both")
        ->check(CLI::IsMember({"effective", "full", "both"}))
        ->capture_default_str();
    simulate->add_option("--t-end", sim_t_end, "final time")->capture_default_str();
    simulate->add_option("--samples", sim_samples, "output samples")->capture_default_str();

    double an_t_end = 1000.0;
    std::size_t an_samples = 2001;
    auto* analytic = app.add_subcommand("analytic", "closed-form trajectory");
    add_common(analytic, common);
    analytic->add_option("--t-end", an_t_end, "final time")->capture_default_str();
    analytic->add_option("--samples", an_samples, "output samples")->capture_default_str();

    std::string steady_model = "effective";
    auto* steady = app.add_subcommand("steady", "long-time energies and efficiency");
    add_common(steady, common);
    steady->add_option("--model", steady_model, "effective, full or both")
        ->check(CLI::IsMember({"effective", "full", "both"}))
        ->capture_default_str();

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep");
    add_common(sweep, common);
    sweep->add_option("--axis", sw.axes, "name:min:max:count[:linear|log] or name=v1,v2,... (up to two)");
    sweep->add_option("--output", sw.outputs, "e_a, e_b, eta, power, trajectory (repeatable)");
    sweep->add_option("--model", sw.model)
        ->check(CLI::IsMember({"effective", "full", "both"}))
        ->capture_default_str();
    sweep->add_option("--evaluation", sw.evaluation)
        ->check(CLI::IsMember({"trajectory", "steady"}))
        ->capture_default_str();
    sweep->add_option("--t-end", sw.t_end)->capture_default_str();
    sweep->add_option("--samples", sw.samples)->capture_default_str();
    auto* nr = sweep->add_flag("--nonreciprocal-lock", sw.nr_lock, "re-solve J at every point");
    auto* ep_flag = sweep->add_flag("--ep-lock", sw.ep_lock, "lock J to J_EP at every point");
    nr->excludes(ep_flag);
    sweep->add_option("--threads", sw.threads, "worker threads (0 = all cores)")->capture_default_str();
    sweep->add_option("--name", sw.name, "output file stem")->capture_default_str();

    std::vector<std::string> ep_free;
    bool ep_newton = false;
    auto* ep = app.add_subcommand("ep", "solve for exceptional points");
    add_common(ep, common);
    ep->add_option("--free", ep_free, "free variable: J, phi, delta_b_p, r (one or two)")->required();
    ep->add_flag("--newton", ep_newton, "skip the closed-form branch");

    std::vector<std::string> fig_names;
    std::string fig_model = "effective";
    unsigned fig_threads = 1;
    auto* figures = app.add_subcommand("figures", "regenerate the figure datasets");
    add_common(figures, common);
    figures->add_option("names", fig_names, "fig2a..fig4b or all (default all)");
    figures->add_option("--model", fig_model)
        ->check(CLI::IsMember({"effective", "full", "both"}))
        ->capture_default_str();
    figures->add_option("--threads", fig_threads)->capture_default_str();

    double scale = 1.0;
    bool report = false;
    auto* validate = app.add_subcommand("validate", "run the acceptance suite");
    add_common(validate, common);
    validate->add_option("--tolerance-scale", scale, "multiply every tolerance")->capture_default_str();
    validate->add_flag("--report", report, "also write validate.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kFatal;
    }

    try {
        if (ep->parsed() && ep_free.size() > 2) throw ConfigError("at most two --free variables");
        if (reduce->parsed()) return cmd_reduce(common, reduce_json);
        if (simulate->parsed()) return cmd_simulate(common, sim_model, sim_t_end, sim_samples);
        if (analytic->parsed()) return cmd_analytic(common, an_t_end, an_samples);
        if (steady->parsed()) return cmd_steady(common, steady_model);
        if (sweep->parsed()) return cmd_sweep(common, sw);
        if (ep->parsed()) return cmd_ep(common, ep_free, ep_newton);
        if (figures->parsed()) return cmd_figures(common, fig_names, fig_model, fig_threads);
        if (validate->parsed()) return cmd_validate(common, scale, report);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kFatal;
    }
    return kFatal;
}
