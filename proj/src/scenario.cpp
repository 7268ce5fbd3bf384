#include "pslab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pslab/errors.hpp"

namespace pslab {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidInput("'" + key + "': not a number: " + text);
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw InvalidInput("'" + key + "': trailing characters in " + text);
    return v;
}

int parse_int(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw InvalidInput("'" + key + "': not an integer: " + text);
    return static_cast<int>(v);
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

struct Builtin {
    const char* name;
    const char* description;
};

const Builtin kBuiltins[] = {
    {"single", "one cell at (-3.5, -4), R = 1/2"},
    {"two-near", "cells at (-3.5, -4) and (-2, -4), gap 0.5"},
    {"two-far", "cells at (-3.5, -4) and (3.5, 4)"},
    {"ten", "ten cells on a perturbed 2x5 grid, minimum boundary gap 0.46, includes (-3.5, -4)"},
    {"d-sweep", "single cell, zero IC, D in {10, 1, 0.1} (subdirectories D10, D1, D0.1)"},
    {"nonzero-C", "single cell, C in {0.1, 10, 100} x {constant, Option 2, continuity} extensions"},
};

Scenario base_scenario(const std::string& layout) {
    Scenario s;
    s.name = layout;
    s.description = builtin_description(layout);
    s.config.domain = builtin_domain(layout);
    return s;
}

// Applies one name modifier; returns false when the token is not a modifier.
bool apply_modifier(Scenario& s, const std::string& tok) {
    auto value = [&](std::size_t prefix) { return parse_double(tok, tok.substr(prefix)); };
    if (tok == "zero") {
        s.recipe.kind = ICRecipe::Kind::Zero;
        s.recipe.background = 0.0;
    } else if (tok == "const") {
        s.recipe.kind = ICRecipe::Kind::Constant;
    } else if (tok == "gauss") {
        if (s.recipe.kind != ICRecipe::Kind::Option && s.recipe.kind != ICRecipe::Kind::Continuity) {
            s.recipe.kind = ICRecipe::Kind::Option;
            s.recipe.option = 1;
        }
    } else if (starts_with(tok, "opt") && tok.size() > 3) {
        s.recipe.kind = ICRecipe::Kind::Option;
        s.recipe.option = parse_int(tok, tok.substr(3));
        if (s.recipe.option < 1 || s.recipe.option > 6) throw InvalidInput("option must be 1..6 in " + tok);
    } else if (starts_with(tok, "cont") && tok.size() > 4) {
        s.recipe.kind = ICRecipe::Kind::Continuity;
        s.recipe.background = value(4);
    } else if (starts_with(tok, "dt") && tok.size() > 2) {
        s.config.dt = value(2);
    } else if (tok[0] == 'D' && tok.size() > 1) {
        s.config.D = value(1);
    } else if (tok[0] == 'T' && tok.size() > 1) {
        s.config.T = value(1);
    } else if (tok[0] == 'h' && tok.size() > 1) {
        s.config.target_h = value(1);
    } else if (tok[0] == 'C' && tok.size() > 1) {
        s.recipe.background = value(1);
        if (s.recipe.kind == ICRecipe::Kind::Zero) s.recipe.kind = ICRecipe::Kind::Constant;
    } else {
        return false;
    }
    return true;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string invalid_name_message(const std::string& name) {
    std::string msg = "unknown scenario '" + name + "'; valid names:";
    for (const auto& n : builtin_names()) msg += " " + n;
    msg += " (optionally followed by -modifiers: D<v> dt<v> T<v> h<v> zero const C<v> gauss opt<k> cont<C>)";
    return msg;
}

}  // namespace

std::vector<std::string> builtin_names() {
    std::vector<std::string> v;
    for (const auto& b : kBuiltins) v.emplace_back(b.name);
    return v;
}

std::string builtin_description(const std::string& name) {
    for (const auto& b : kBuiltins)
        if (name == b.name) return b.description;
    throw InvalidInput(invalid_name_message(name));
}

DomainSpec builtin_domain(const std::string& name) {
    DomainSpec d;
    auto cell = [](double x, double y) { return CellSpec{{x, y}}; };
    if (name == "single" || name == "d-sweep" || name == "nonzero-C") {
        d.cells = {cell(-3.5, -4.0)};
    } else if (name == "two-near") {
        d.cells = {cell(-3.5, -4.0), cell(-2.0, -4.0)};
    } else if (name == "two-far") {
        d.cells = {cell(-3.5, -4.0), cell(3.5, 4.0)};
    } else if (name == "ten") {
        d.cells = {cell(-3.5, -4.0), cell(-2.05, -3.8), cell(-0.6, -4.1), cell(0.9, -3.9), cell(2.4, -4.0),
                   cell(-3.4, -2.5), cell(-1.9, -2.3), cell(-0.45, -2.6), cell(1.05, -2.4), cell(2.55, -2.55)};
    } else {
        throw InvalidInput(invalid_name_message(name));
    }
    return d;
}

std::vector<Job> resolve_name(const std::string& name_in) {
    std::string name = name_in;
    if (starts_with(name, "single-cell")) name = "single" + name.substr(std::string("single-cell").size());
    // Longest built-in prefix followed by end of string or '-'.
    std::string base;
    for (const auto& b : builtin_names())
        if (starts_with(name, b) && (name.size() == b.size() || name[b.size()] == '-') && b.size() > base.size()) base = b;
    if (base.empty()) throw InvalidInput(invalid_name_message(name_in));
    std::vector<std::string> mods;
    if (name.size() > base.size()) mods = split(name.substr(base.size() + 1), '-');

    std::vector<Job> jobs;
    auto finish = [&](Scenario s, const std::string& subdir, const std::string& job_name) {
        for (const auto& m : mods) {
            if (m.empty() || !apply_modifier(s, m)) throw InvalidInput("unknown modifier '" + m + "' in " + name_in);
        }
        s.name = job_name + (mods.empty() ? "" : name.substr(base.size()));
        jobs.push_back({subdir, std::move(s)});
    };
    if (base == "d-sweep") {
        for (double D : {10.0, 1.0, 0.1}) {
            Scenario s = base_scenario("d-sweep");
            s.config.D = D;
            finish(s, "D" + short_num(D), "single-D" + short_num(D));
        }
    } else if (base == "nonzero-C") {
        for (double C : {0.1, 10.0, 100.0}) {
            for (const char* ext : {"const", "opt2", "cont"}) {
                Scenario s = base_scenario("nonzero-C");
                s.recipe.background = C;
                std::string e = ext;
                if (e == "const") s.recipe.kind = ICRecipe::Kind::Constant;
                if (e == "opt2") {
                    s.recipe.kind = ICRecipe::Kind::Option;
                    s.recipe.option = 2;
                }
                if (e == "cont") s.recipe.kind = ICRecipe::Kind::Continuity;
                const std::string tag = "C" + short_num(C) + "-" + e;
                finish(s, tag, "single-" + (e == "cont" ? "cont" + short_num(C) : tag));
            }
        }
    } else {
        finish(base_scenario(base), "", base);
    }
    return jobs;
}

ConfigMap parse_config(std::istream& is) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
    ConfigMap out;
    for (const auto& [section, keys] : pt) {
        if (keys.empty() && !keys.data().empty()) throw InvalidInput("config: key '" + section + "' outside a section");
        for (const auto& [key, value] : keys) out[section + "." + key] = trim(value.data());
    }
    return out;
}

ConfigMap read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open config file " + path);
    return parse_config(f);
}

void apply_overrides(Scenario& s, const ConfigMap& cfg) {
    static const std::set<std::string> known = {
        "scenario.name", "scenario.description", "domain.half_width", "domain.cells", "simulation.D",
        "simulation.dt", "simulation.T", "simulation.h", "simulation.segments", "simulation.stride",
        "initial_condition.kind", "initial_condition.background", "initial_condition.option",
        "initial_condition.p0", "initial_condition.t0", "solver.tolerance", "solver.cap_factor",
        "metrics.flux_recovery"};
    for (const auto& [key, value] : cfg) {
        if (starts_with(key, "report.")) continue;  // informational sections of meta.txt
        if (!known.count(key)) throw InvalidInput("config: unknown key '" + key + "'");
        auto d = [&] { return parse_double(key, value); };
        if (key == "scenario.description") s.description = value;
        else if (key == "domain.half_width") s.config.domain.half_width = d();
        else if (key == "domain.cells") {
            s.config.domain.cells.clear();
            for (const auto& item : split(value, ';')) {
                if (trim(item).empty()) continue;
                const auto f = split(item, ',');
                if (f.size() < 2 || f.size() > 4) throw InvalidInput("config: cell needs x,y[,R[,phi]]: " + item);
                CellSpec c;
                c.center = {parse_double(key, trim(f[0])), parse_double(key, trim(f[1]))};
                if (f.size() > 2) c.radius = parse_double(key, trim(f[2]));
                if (f.size() > 3) c.flux_density = parse_double(key, trim(f[3]));
                s.config.domain.cells.push_back(c);
            }
        } else if (key == "simulation.D") s.config.D = d();
        else if (key == "simulation.dt") s.config.dt = d();
        else if (key == "simulation.T") s.config.T = d();
        else if (key == "simulation.h") s.config.target_h = d();
        else if (key == "simulation.segments") s.config.segments = parse_int(key, value);
        else if (key == "simulation.stride") s.config.stride = parse_int(key, value);
        else if (key == "initial_condition.kind") {
            if (value == "zero") s.recipe.kind = ICRecipe::Kind::Zero;
            else if (value == "constant") s.recipe.kind = ICRecipe::Kind::Constant;
            else if (value == "explicit") s.recipe.kind = ICRecipe::Kind::Explicit;
            else if (value == "option") s.recipe.kind = ICRecipe::Kind::Option;
            else if (value == "continuity") s.recipe.kind = ICRecipe::Kind::Continuity;
            else throw InvalidInput("config: initial_condition.kind must be zero|constant|explicit|option|continuity");
        } else if (key == "initial_condition.background") s.recipe.background = d();
        else if (key == "initial_condition.option") s.recipe.option = parse_int(key, value);
        else if (key == "initial_condition.p0") s.recipe.p0 = d();
        else if (key == "initial_condition.t0") s.recipe.t0 = d();
        else if (key == "solver.tolerance") s.config.solver.relative_tolerance = d();
        else if (key == "solver.cap_factor") s.config.solver.iteration_cap_factor = d();
        else if (key == "metrics.flux_recovery") {
            if (value == "consistent") s.recovery = FluxRecovery::Consistent;
            else if (value == "adjacent") s.recovery = FluxRecovery::AdjacentGradient;
            else throw InvalidInput("config: metrics.flux_recovery must be consistent|adjacent");
        }
    }
}

std::vector<Job> resolve_config(const ConfigMap& cfg) {
    std::vector<Job> jobs;
    auto it = cfg.find("scenario.name");
    if (it != cfg.end() && !it->second.empty()) {
        jobs = resolve_name(it->second);
    } else {
        Scenario s = base_scenario("single");
        s.name = "custom";
        s.description = "from config file";
        jobs.push_back({"", s});
    }
    for (auto& j : jobs) apply_overrides(j.scenario, cfg);
    return jobs;
}

void resolve_ic(Scenario& s) {
    SimConfig& c = s.config;
    const ICRecipe& r = s.recipe;
    s.optimizer.reset();
    c.background = r.background;
    c.gaussian.clear();
    switch (r.kind) {
        case ICRecipe::Kind::Zero:
            c.ic_kind = ICKind::Zero;
            c.background = 0.0;
            return;
        case ICRecipe::Kind::Constant:
            c.ic_kind = ICKind::Constant;
            return;
        case ICRecipe::Kind::Explicit:
            c.ic_kind = ICKind::GaussianExtension;
            c.gaussian = {{r.p0, r.t0, r.background}};
            return;
        case ICRecipe::Kind::Option:
        case ICRecipe::Kind::Continuity:
            break;
    }
    if (c.domain.cells.empty()) throw InvalidInput("Gaussian extension needs at least one cell");
    ObjectiveSpec spec = r.kind == ICRecipe::Kind::Option ? ObjectiveSpec::option(r.option) : ObjectiveSpec::continuity(r.background);
    spec.horizon = c.T;
    c.ic_kind = ICKind::GaussianExtension;
    // One optimization per distinct (R, phi); identical cells share the result.
    std::vector<std::pair<std::pair<double, double>, OptimResult>> cache;
    for (const auto& cell : c.domain.cells) {
        const auto key = std::make_pair(cell.radius, cell.flux_density);
        auto hit = std::find_if(cache.begin(), cache.end(), [&](const auto& e) { return e.first == key; });
        if (hit == cache.end()) {
            OptimResult res = optimize(spec, FluxParams::matched(cell.radius, c.D, cell.flux_density));
            if (!res.converged)
                throw SolverError("initial-condition optimizer did not converge: " + res.diagnostics, res.objective, res.iterations);
            cache.emplace_back(key, res);
            hit = cache.end() - 1;
        }
        c.gaussian.push_back({hit->second.p0, hit->second.t0, r.background});
    }
    s.optimizer = cache.front().second;
}

void write_meta(std::ostream& os, const Scenario& s, const MeshPair* pair, const ComparisonResult* result,
                const std::string& status) {
    const SimConfig& c = s.config;
    os << "# Resolved run configuration; re-run with: pslab run --config meta.txt --out DIR\n";
    os << "[scenario]\nname = " << s.name << "\ndescription = " << s.description << "\n\n";
    os << "[domain]\nhalf_width = " << num(c.domain.half_width) << "\ncells = ";
    for (std::size_t i = 0; i < c.domain.cells.size(); ++i) {
        const auto& cell = c.domain.cells[i];
        os << (i ? "; " : "") << num(cell.center.x) << "," << num(cell.center.y) << "," << num(cell.radius) << ","
           << num(cell.flux_density);
    }
    os << "\n\n[simulation]\nD = " << num(c.D) << "\ndt = " << num(c.dt) << "\nT = " << num(c.T) << "\nh = "
       << num(c.target_h) << "\nsegments = " << c.segments << "\nstride = " << c.stride << "\n\n";
    os << "[initial_condition]\n";
    switch (c.ic_kind) {
        case ICKind::Zero: os << "kind = zero\n"; break;
        case ICKind::Constant: os << "kind = constant\nbackground = " << num(c.background) << "\n"; break;
        case ICKind::GaussianExtension:
            os << "kind = explicit\nbackground = " << num(c.background) << "\np0 = " << num(c.gaussian.front().p0)
               << "\nt0 = " << num(c.gaussian.front().t0) << "\n";
            break;
    }
    os << "\n[solver]\ntolerance = " << num(c.solver.relative_tolerance) << "\ncap_factor = "
       << num(c.solver.iteration_cap_factor) << "\n\n";
    os << "[metrics]\nflux_recovery = " << (s.recovery == FluxRecovery::Consistent ? "consistent" : "adjacent") << "\n";

    os << "\n# Informational sections below are ignored when this file is read back.\n";
    os << "[report.run]\nstatus = " << status << "\nsteps = " << c.steps() << "\nrecorded_rows = " << c.steps() / c.stride + 1
       << "\nlinear_solver = jacobi_pcg\n";
    if (s.optimizer) {
        const auto& o = *s.optimizer;
        os << "\n[report.optimizer]\nrecipe = ";
        if (s.recipe.kind == ICRecipe::Kind::Option) os << "option " << s.recipe.option;
        else os << "continuity C=" << num(s.recipe.background);
        os << "\np0 = " << num(o.p0) << "\nt0 = " << num(o.t0) << "\nobjective = " << num(o.objective)
           << "\niterations = " << o.iterations << "\nconverged = " << (o.converged ? "true" : "false") << "\n";
    }
    if (pair) {
        const MeshReport rf = validate_mesh(pair->full);
        const MeshReport re = validate_mesh(pair->exclusion);
        os << "\n[report.mesh]\nfull_nodes = " << pair->full.node_count() << "\nfull_triangles = " << pair->full.triangle_count()
           << "\nexclusion_nodes = " << pair->exclusion.node_count() << "\nexclusion_triangles = "
           << pair->exclusion.triangle_count() << "\nexclusion_mean_edge = " << num(re.mean_edge_length)
           << "\nexclusion_area = " << num(re.environment_area) << "\nmin_triangle_area = " << num(rf.min_triangle_area)
           << "\nvalid = " << (rf.ok() && re.ok() ? "true" : "false") << "\n";
    }
    if (result) {
        const auto& st = result->stats;
        os << "\n[report.solver]\ncg_iteration_cap = " << st.cg_cap << "\nmax_cg_iterations_s = " << st.max_cg_iterations_s
           << "\nmax_cg_iterations_p = " << st.max_cg_iterations_p << "\nmax_mass_drift_s = " << num(st.max_mass_drift_s)
           << "\nmax_mass_drift_p = " << num(st.max_mass_drift_p) << "\ninflux_s = " << num(st.influx_s)
           << "\ninflux_p = " << num(st.influx_p) << "\n";
        os << "\n[report.warnings]\ncount = " << result->warnings.size() << "\n";
        for (std::size_t i = 0; i < result->warnings.size(); ++i) os << "w" << i << " = " << result->warnings[i] << "\n";
    }
}

void write_ic_recipe(std::ostream& os, const ObjectiveSpec& spec, const FluxParams& fp, const OptimResult& r) {
    os << "# Optimized Gaussian extension: " << spec.describe() << ", R=" << num(fp.R) << " D=" << num(fp.D)
       << " phi=" << num(fp.phi) << "\n# objective = " << num(r.objective) << ", converged = " << (r.converged ? "true" : "false")
       << "\n[initial_condition]\nkind = explicit\nbackground = " << num(spec.constraint == ConstraintKind::Continuity ? spec.background : 0.0)
       << "\np0 = " << num(r.p0) << "\nt0 = " << num(r.t0) << "\n";
}

}  // namespace pslab
