#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pslab/errors.hpp"
#include "pslab/scenario.hpp"

namespace py = pybind11;
using namespace pslab;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict mesh_dict(const Mesh& m) {
    py::array_t<double> nodes({m.node_count(), std::size_t{2}});
    auto n = nodes.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.node_count(); ++i) {
        n(i, 0) = m.nodes[i].x;
        n(i, 1) = m.nodes[i].y;
    }
    py::array_t<int> tris({m.triangle_count(), std::size_t{3}});
    py::array_t<int> tags(m.triangle_count());
    auto t = tris.mutable_unchecked<2>();
    auto g = tags.mutable_unchecked<1>();
    for (std::size_t k = 0; k < m.triangle_count(); ++k) {
        for (std::size_t j = 0; j < 3; ++j) t(k, j) = m.triangles[k][j];
        g(k) = m.regions[k].cell + 1;  // 0 = environment, i + 1 = cell i
    }
    py::dict d;
    d["nodes"] = nodes;
    d["triangles"] = tris;
    d["tags"] = tags;
    return d;
}

DomainSpec make_domain(const std::vector<std::tuple<double, double, double, double>>& cells, double half_width) {
    DomainSpec d;
    d.half_width = half_width;
    for (const auto& [x, y, R, phi] : cells) d.cells.push_back({{x, y}, R, phi});
    return d;
}

Scenario scenario_from(const std::string& name, const std::map<std::string, std::string>& overrides) {
    auto jobs = resolve_name(name);
    if (jobs.size() != 1) throw InvalidInput(name + " is a sweep; pick one job, e.g. via run_sweep");
    Scenario s = jobs.front().scenario;
    ConfigMap ov;
    for (const auto& [k, v] : overrides) ov[k.find('.') == std::string::npos ? "simulation." + k : k] = v;
    apply_overrides(s, ov);
    return s;
}

py::dict run(Scenario s) {
    resolve_ic(s);
    s.config.validate();
    ComparisonResult res;
    {
        py::gil_scoped_release release;
        const MeshPair pair = generate_mesh_pair(s.config.domain, s.config.target_h, s.config.segments);
        res = run_comparison(pair, s.config, s.recovery);
    }
    const auto& rows = res.series.rows;
    std::vector<double> cols[9];
    for (const auto& r : rows) {
        const double v[9] = {r.t, r.l2, r.h1, r.grad_l2, r.c_star, r.rel_err, r.mass_s, r.mass_p, r.identity.residual()};
        for (int k = 0; k < 9; ++k) cols[k].push_back(v[k]);
    }
    const char* names[9] = {"t", "l2", "h1", "gradl2", "c_star", "rel_err", "mass_s", "mass_p", "identity_residual"};
    py::dict out;
    for (int k = 0; k < 9; ++k) out[names[k]] = as_array(cols[k]);
    std::ostringstream csv, meta;
    write_error_csv(csv, res.series);
    write_meta(meta, s, nullptr, &res, "ok");
    out["csv"] = csv.str();
    out["meta"] = meta.str();
    out["name"] = s.name;
    out["max_mass_drift"] = std::max(res.stats.max_mass_drift_s, res.stats.max_mass_drift_p);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spatial exclusion vs point source diffusion: meshes, analytic fluxes, optimizer, runs";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<GenerationError>(m, "GenerationError", PyExc_RuntimeError);
    py::register_exception<AssemblyError>(m, "AssemblyError", PyExc_RuntimeError);

    py::class_<FluxParams>(m, "FluxParams")
        .def(py::init([](double R, double D, double phi) { return FluxParams::matched(R, D, phi); }), py::arg("R") = 0.5,
             py::arg("D") = 0.1, py::arg("phi") = 1.0)
        .def_readwrite("R", &FluxParams::R)
        .def_readwrite("D", &FluxParams::D)
        .def_readwrite("phi", &FluxParams::phi)
        .def_readwrite("Phi", &FluxParams::Phi)
        .def_property_readonly("alpha", &FluxParams::alpha);

    m.def("fundamental_solution", &fundamental_solution, py::arg("r"), py::arg("t"), py::arg("D"));
    m.def(
        "phi1", [](double t, const FluxParams& fp, double p0, double t0) { return phi1(t, fp, {p0, t0, 0.0}); },
        py::arg("t"), py::arg("params"), py::arg("p0"), py::arg("t0"));
    m.def("phi2", &phi2, py::arg("t"), py::arg("params"));
    m.def(
        "phi_sum", [](double t, const FluxParams& fp, double p0, double t0) { return phi_sum(t, fp, {p0, t0, 0.0}); },
        py::arg("t"), py::arg("params"), py::arg("p0"), py::arg("t0"));
    m.def(
        "phi_sum_derivative",
        [](double t, const FluxParams& fp, double p0, double t0) { return phi_sum_derivative(t, fp, {p0, t0, 0.0}); },
        py::arg("t"), py::arg("params"), py::arg("p0"), py::arg("t0"));
    m.def("p0_from_t0", &p0_from_t0, py::arg("t0"), py::arg("params"));
    m.def("p0_from_continuity", &p0_from_continuity, py::arg("t0"), py::arg("C"), py::arg("params"));
    m.def(
        "classify_phi_sum",
        [](const FluxParams& fp, double p0, double t0, double horizon, bool settle) {
            const GaussianICParams ic{p0, t0, 0.0};
            const PhiSumClassification c = settle ? classify_phi_sum_settled(fp, ic, horizon) : classify_phi_sum(fp, ic, horizon);
            py::dict d;
            d["label"] = c.label;
            d["critical_points"] = c.critical_points;
            d["degenerate"] = c.degenerate;
            d["truncated"] = c.truncated;
            d["horizon"] = c.horizon;
            d["t_minus"] = c.t_minus;
            d["t_plus"] = c.t_plus;
            d["min_deviation"] = c.min_deviation;
            d["max_deviation"] = c.max_deviation;
            return d;
        },
        py::arg("params"), py::arg("p0"), py::arg("t0"), py::arg("horizon") = 40.0, py::arg("settle") = true,
        "Shape of phi_sum. With settle=True the horizon grows until the last critical point is found.");

    m.def(
        "optimize_ic",
        [](const std::string& option, const FluxParams& fp, double horizon) {
            ObjectiveSpec spec;
            if (option.rfind("continuity:", 0) == 0)
                spec = ObjectiveSpec::continuity(std::stod(option.substr(11)));
            else
                spec = ObjectiveSpec::option(std::stoi(option));
            spec.horizon = horizon;
            const OptimResult r = optimize(spec, fp);
            py::dict d;
            d["p0"] = r.p0;
            d["t0"] = r.t0;
            d["objective"] = r.objective;
            d["iterations"] = r.iterations;
            d["converged"] = r.converged;
            d["spec"] = spec.describe();
            return d;
        },
        py::arg("option"), py::arg("params") = FluxParams::matched(0.5, 0.1, 1.0), py::arg("horizon") = 40.0,
        "option is '1'..'6' or 'continuity:C'.");

    m.def(
        "generate_mesh",
        [](const std::vector<std::tuple<double, double, double, double>>& cells, double h, int segments,
           double half_width) {
            const MeshPair p = generate_mesh_pair(make_domain(cells, half_width), h, segments);
            const MeshReport rf = validate_mesh(p.full), re = validate_mesh(p.exclusion);
            py::dict d;
            d["full"] = mesh_dict(p.full);
            d["exclusion"] = mesh_dict(p.exclusion);
            d["node_map"] = p.node_map;
            d["valid"] = rf.ok() && re.ok();
            d["environment_area"] = re.environment_area;
            d["mean_edge_length"] = re.mean_edge_length;
            return d;
        },
        py::arg("cells"), py::arg("h") = 0.127, py::arg("segments") = 64, py::arg("half_width") = 10.0,
        "cells: list of (x, y, R, phi).");

    m.def("scenarios", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& n : builtin_names()) out.emplace_back(n, builtin_description(n));
        return out;
    });
    m.def(
        "run_scenario",
        [](const std::string& name, const std::map<std::string, std::string>& overrides) {
            return run(scenario_from(name, overrides));
        },
        py::arg("name"), py::arg("overrides") = std::map<std::string, std::string>{},
        "Runs one scenario. Overrides use config keys ('simulation.h' or just 'h').");
    m.def(
        "run_config",
        [](const std::string& text) {
            std::istringstream is(text);
            auto jobs = resolve_config(parse_config(is));
            if (jobs.size() != 1) throw InvalidInput("config expands to a sweep");
            return run(jobs.front().scenario);
        },
        py::arg("text"), "Runs the scenario described by a configuration text (e.g. a meta.txt).");
}
