#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nrqb/acceptance.hpp"
#include "nrqb/analytic.hpp"
#include "nrqb/config.hpp"
#include "nrqb/dynamics.hpp"
#include "nrqb/error.hpp"
#include "nrqb/experiments.hpp"
#include "nrqb/spectrum.hpp"

namespace py = pybind11;
using namespace nrqb;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict trajectory_dict(const Trajectory& t) {
    const auto n = static_cast<py::ssize_t>(t.size());
    const auto modes = static_cast<py::ssize_t>(t.states.empty() ? 0 : t.states.front().modes());
    py::array_t<std::complex<double>> amp({n, modes});
    py::array_t<std::complex<double>> second({n, modes, modes});
    auto a = amp.mutable_unchecked<2>();
    auto s = second.mutable_unchecked<3>();
    for (py::ssize_t k = 0; k < n; ++k) {
        const auto& st = t.states[static_cast<std::size_t>(k)];
        for (py::ssize_t i = 0; i < modes; ++i) {
            a(k, i) = st.first(i);
            for (py::ssize_t j = 0; j < modes; ++j) s(k, i, j) = st.second(i, j);
        }
    }
    py::dict d;
    d["t"] = as_array(t.times);
    d["amplitudes"] = amp;
    d["second"] = second;
    d["e_a"] = as_array(t.e_a);
    d["e_b"] = as_array(t.e_b);
    d["eta"] = as_array(t.eta);
    d["power"] = as_array(t.power);
    return d;
}

py::dict dataset_dict(const Dataset& d) {
    py::dict out;
    for (const auto& c : d.columns) out[py::str(c)] = as_array(d.values(c));
    if (!d.status.empty()) out["status"] = d.status;
    return out;
}

SystemParams params_from_kwargs(const std::string& preset_name, const py::kwargs& kw) {
    SystemParams p = preset(preset_name);
    for (const auto& item : kw) set_field(p, py::cast<std::string>(item.first), py::cast<double>(item.second));
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Nonreciprocal quantum battery simulator";
    m.attr("__version__") = library_version();

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<IncompatiblePhase>(m, "IncompatiblePhase", base.ptr());
    py::register_exception<UnstableSystem>(m, "UnstableSystem", base.ptr());
    py::register_exception<NonpositiveRate>(m, "NonpositiveRate", base.ptr());
    py::register_exception<ConditionsNotMet>(m, "ConditionsNotMet", base.ptr());
    py::register_exception<NoRealSolution>(m, "NoRealSolution", base.ptr());
    py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());
    py::register_exception<StepSizeUnderflow>(m, "StepSizeUnderflow", base.ptr());
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());

    py::class_<SystemParams> sp(m, "SystemParams");
    sp.def(py::init<>());
    for (const auto& name : field_names()) {
        sp.def_property(
            name.c_str(), [name](const SystemParams& p) { return get_field(p, name); },
            [name](SystemParams& p, double v) { set_field(p, name, v); });
    }
    sp.def("__repr__", [](const SystemParams& p) { return "SystemParams(\n" + format_config(p) + ")"; });

    py::class_<EffectiveParams>(m, "EffectiveParams")
        .def_readonly("delta_a_p", &EffectiveParams::delta_a_p)
        .def_readonly("delta_b_p", &EffectiveParams::delta_b_p)
        .def_readonly("gamma_a_eff", &EffectiveParams::gamma_a_eff)
        .def_readonly("gamma_b_eff", &EffectiveParams::gamma_b_eff)
        .def_readonly("g_coh", &EffectiveParams::g_coh)
        .def_readonly("gamma_diss", &EffectiveParams::gamma_diss)
        .def_readonly("J", &EffectiveParams::J)
        .def_readonly("j_plus", &EffectiveParams::j_plus)
        .def_readonly("j_minus", &EffectiveParams::j_minus)
        .def_readonly("lambda_a", &EffectiveParams::lambda_a)
        .def_readonly("lambda_b", &EffectiveParams::lambda_b)
        .def_readonly("phi", &EffectiveParams::phi)
        .def_readonly("epsilon", &EffectiveParams::epsilon);

    m.def("preset", [](const std::string& name, const py::kwargs& kw) { return params_from_kwargs(name, kw); },
          py::arg("name") = "baseline", "Named preset with optional field overrides.");
    m.def("preset_names", &preset_names);
    m.def("parse_config", [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
    });
    m.def("reduce", &reduce_to_effective, py::arg("params"));

    m.def("steady", [](const SystemParams& p) {
        const SteadyEnergies s = steady_energies(reduce_to_effective(p));
        return py::dict(py::arg("e_a") = s.e_a, py::arg("e_b") = s.e_b, py::arg("eta") = s.eta,
                        py::arg("ratio") = s.ratio, py::arg("closed_form") = s.closed_form);
    }, py::arg("params"));

    m.def("simulate", [](const SystemParams& p, double t_end, std::size_t samples, const std::string& model,
                         double rtol, double atol) {
        IntegratorOptions o;
        o.rtol = rtol;
        o.atol = atol;
        if (model != "full" && model != "effective") throw InvalidParameter("model must be effective or full");
        const auto grid = uniform_grid(t_end, samples);
        Trajectory t;
        {
            py::gil_scoped_release release;
            t = model == "full" ? integrate(rate_matched_three_mode(p), MomentState::vacuum(3), grid, o)
                                : integrate(reduce_to_effective(p), MomentState::vacuum(2), grid, o);
        }
        return trajectory_dict(t);
    }, py::arg("params"), py::arg("t_end") = 200.0, py::arg("samples") = 2001,
       py::arg("model") = "effective", py::arg("rtol") = 1e-9, py::arg("atol") = 1e-12);

    m.def("analytic", [](const SystemParams& p, double t_end, std::size_t samples) {
        return trajectory_dict(closed_form_trajectory(reduce_to_effective(p), uniform_grid(t_end, samples)));
    }, py::arg("params"), py::arg("t_end") = 200.0, py::arg("samples") = 2001);

    m.def("spectrum", [](const SystemParams& p) {
        const SpectralReport r = spectral(drift_matrix(reduce_to_effective(p)));
        return py::dict(py::arg("lambda_plus") = r.lambda_plus, py::arg("lambda_minus") = r.lambda_minus,
                        py::arg("overlap") = r.eigvec_overlap, py::arg("discriminant") = r.discriminant,
                        py::arg("is_ep") = r.is_ep);
    }, py::arg("params"));

    m.def("solve_ep", [](const SystemParams& p, const std::vector<std::string>& free) {
        std::vector<EpVariable> vars;
        for (const auto& f : free) vars.push_back(ep_variable_from_string(f));
        py::list out;
        for (const auto& s : solve_ep(reduce_to_effective(p), vars)) {
            py::dict values;
            for (const auto& [v, x] : s.values) values[py::str(std::string(to_string(v)))] = x;
            out.append(py::dict(py::arg("values") = values, py::arg("residual") = s.residual,
                                py::arg("overlap") = s.overlap, py::arg("closed_form") = s.closed_form));
        }
        return out;
    }, py::arg("params"), py::arg("free") = std::vector<std::string>{"J"});

    m.def("figure", [](const std::string& name, const std::string& model) {
        FigureOptions o;
        o.model = sweep_model_from_string(model);
        Dataset d;
        {
            py::gil_scoped_release release;
            d = figure(name, o);
        }
        return dataset_dict(d);
    }, py::arg("name"), py::arg("model") = "effective");
    m.def("figure_names", &figure_names);

    m.def("validate", [](double scale) {
        AcceptanceOptions o;
        o.tolerance_scale = scale;
        std::vector<CriterionResult> res;
        {
            py::gil_scoped_release release;
            res = run_acceptance(o);
        }
        py::list out;
        for (const auto& r : res) {
            out.append(py::dict(py::arg("id") = r.id, py::arg("title") = r.title, py::arg("hard") = r.hard,
                                py::arg("passed") = r.passed, py::arg("detail") = r.detail,
                                py::arg("seconds") = r.seconds));
        }
        return out;
    }, py::arg("tolerance_scale") = 1.0);
}
