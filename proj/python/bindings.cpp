// Python bindings: pointwise operator functions and config-driven solves.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string_view>

#include "subslope/config.hpp"
#include "subslope/errors.hpp"
#include "subslope/parallel.hpp"

namespace py = pybind11;
using namespace subslope;

namespace {

ProblemSpec load_spec(const std::string& config) {
    constexpr std::string_view prefix = "builtin:";
    if (std::string_view(config).starts_with(prefix)) {
        const std::string name = config.substr(prefix.size());
        const auto it = builtin_configs().find(name);
        if (it == builtin_configs().end()) throw ConfigError("no builtin config named '" + name + "'");
        return parse_config(it->second, ".", name);
    }
    return load_config(config);
}

Problem load_problem(const std::string& config, const std::optional<std::vector<int>>& shape) {
    const ProblemSpec spec = load_spec(config);
    return instantiate(spec, shape ? &*shape : nullptr);
}

py::array_t<double> to_numpy(const ScalarField& f) {
    std::vector<py::ssize_t> shape(f.geometry()->shape().begin(), f.geometry()->shape().end());
    py::array_t<double> out(shape);
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

py::dict solve(const std::string& config, const std::optional<std::vector<int>>& shape) {
    const Problem p = load_problem(config, shape);
    const PathResult res = [&] {
        py::gil_scoped_release release;
        return run_path(p.op, p.omega, p.chi, p.h, p.u_bar, p.u_sub, p.path);
    }();
    py::list monitor;
    for (const MonitorRow& r : res.log) {
        py::dict row;
        row["t"] = r.t;
        row["c"] = r.c;
        row["residual"] = r.residual;
        row["newton_iters"] = r.newton_iters;
        row["min_cone_margin"] = r.min_cone_margin;
        row["subsolution_margin"] = r.subsolution_margin;
        row["c_upper"] = r.c_upper;
        monitor.append(row);
    }
    py::dict d;
    d["operator"] = p.op.name();
    d["c_1"] = res.final_state.c;
    d["c_bar"] = res.c_bar;
    d["delta"] = res.delta;
    d["sigma_lower"] = res.sigma_lower;
    d["residual"] = res.final_state.diagnostics.residual;
    d["xi_min"] = res.final_state.diagnostics.xi_min;
    d["c_expected"] = p.c_expected ? py::cast(*p.c_expected) : py::none();
    d["phi"] = to_numpy(sup_normalized(res.final_state.phi));
    d["u"] = to_numpy(res.solution());
    d["h"] = to_numpy(p.h);
    d["monitor"] = monitor;
    return d;
}

py::dict check_subsolution(const std::string& config, double shift) {
    const Problem p = load_problem(config, std::nullopt);
    const SubsolutionCheck chk = is_c_subsolution(p.op, lambda_of(p.omega, p.chi, p.u_sub), p.h, shift);
    py::dict d;
    d["is_subsolution"] = chk.is_subsolution;
    d["min_margin"] = chk.min_margin;
    d["argmin"] = chk.argmin;
    d["mean_margin"] = chk.mean_margin;
    return d;
}

py::dict bracket(const std::string& config) {
    const Problem p = load_problem(config, std::nullopt);
    std::vector<ScalarField> trials{ScalarField(p.geometry, 0.0)};
    for (ScalarField& t : make_trials(p)) trials.push_back(std::move(t));
    const SubslopeBracket b = subslope_bracket(p.op, p.omega, p.chi, p.h, trials);
    py::dict d;
    d["lower"] = b.lower;
    d["upper"] = b.upper;
    d["trials"] = b.trials;
    d["admissible"] = b.admissible;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sub-slope and continuity solver for eigenvalue equations on flat tori";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<NotSubsolution>(m, "NotSubsolution", error.ptr());
    py::register_exception<MonitorBreach>(m, "MonitorBreach", error.ptr());
    py::register_exception<PathFailure>(m, "PathFailure", error.ptr());

    py::enum_<DhymBranch>(m, "DhymBranch")
        .value("hypercritical", DhymBranch::Hypercritical)
        .value("supercritical", DhymBranch::Supercritical)
        .value("unrestricted", DhymBranch::Unrestricted);

    py::class_<OperatorSpec>(m, "Operator")
        .def_static("quotient", &OperatorSpec::quotient, py::arg("n"), py::arg("k"), py::arg("l"))
        .def_static("dhym", &OperatorSpec::dhym, py::arg("n"), py::arg("branch") = DhymBranch::Supercritical)
        .def_property_readonly("n", &OperatorSpec::n)
        .def_property_readonly("name", &OperatorSpec::name)
        .def("cone_margin", [](const OperatorSpec& op, const RVector& l) { return op.cone().margin(l); })
        .def("in_cone", [](const OperatorSpec& op, const RVector& l) { return op.cone().contains(l); })
        .def("__call__", &f_eval)
        .def("grad", &f_grad)
        .def("f_infinity", &f_infinity)
        .def("__repr__", [](const OperatorSpec& op) { return "<Operator " + op.name() + ">"; });

    m.def("sigma", &sigma, py::arg("k"), py::arg("lam"));
    m.def("builtin_configs", &builtin_configs);
    m.def("set_threads", &set_thread_count);
    m.def("solve", &solve, py::arg("config"), py::arg("shape") = std::nullopt,
          "Runs the continuity path. config is a path or builtin:<name>.");
    m.def("check_subsolution", &check_subsolution, py::arg("config"), py::arg("shift") = 0.0);
    m.def("subslope_bracket", &bracket, py::arg("config"));
}
