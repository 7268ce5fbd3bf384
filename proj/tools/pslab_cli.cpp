// Command-line front-end: run scenarios, optimize initial conditions, list the
// catalog, export meshes.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "pslab/errors.hpp"
#include "pslab/scenario.hpp"

namespace fs = std::filesystem;
using namespace pslab;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kSolver = 3 };

struct SimFlags {
    std::string config;
    std::string out;
    std::map<std::string, std::string> values;  // flag name -> text
    std::string recovery;
    int jobs = 1;
    int snapshot_every = 0;
};

void add_sim_flags(CLI::App* app, SimFlags& f) {
    app->add_option("--config", f.config, "configuration file (sections, key = value)");
    for (const char* name : {"D", "dt", "T", "h", "segments", "stride"})
        app->add_option(std::string("--") + name, f.values[name], std::string("override simulation.") + name);
}

ConfigMap overrides_from(const SimFlags& f, const CLI::App* app) {
    ConfigMap m;
    for (const auto& [name, text] : f.values)
        if (app->count("--" + name)) m["simulation." + name] = text;
    if (!f.recovery.empty()) m["metrics.flux_recovery"] = f.recovery;
    return m;
}

std::vector<Job> jobs_for(const std::string& name, const SimFlags& f, const CLI::App* app) {
    std::vector<Job> jobs;
    if (!f.config.empty()) {
        ConfigMap cfg = read_config_file(f.config);
        if (!name.empty()) cfg["scenario.name"] = name;
        jobs = resolve_config(cfg);
    } else if (!name.empty()) {
        jobs = resolve_name(name);
    } else {
        throw InvalidInput("give a scenario name or --config PATH");
    }
    const ConfigMap ov = overrides_from(f, app);
    for (auto& j : jobs) apply_overrides(j.scenario, ov);
    return jobs;
}

struct JobOutcome {
    int code = kOk;
    std::string message;
};

JobOutcome run_job(Job job, const fs::path& dir, int snapshot_every) {
    JobOutcome out;
    Scenario& s = job.scenario;
    fs::create_directories(dir);
    std::unique_ptr<MeshPair> pair;
    try {
        resolve_ic(s);
        s.config.validate();
        pair = std::make_unique<MeshPair>(generate_mesh_pair(s.config.domain, s.config.target_h, s.config.segments));
        if (snapshot_every > 0) fs::create_directories(dir / "snapshots");
        const auto on_record = [&](int step, const NodalField& us, const NodalField& up) {
            if (snapshot_every <= 0 || step % snapshot_every != 0) return;
            std::ofstream fs_(dir / "snapshots" / ("u_s_" + std::to_string(step) + ".field"));
            write_field(fs_, us.values);
            std::ofstream fp_(dir / "snapshots" / ("u_p_" + std::to_string(step) + ".field"));
            write_field(fp_, up.values);
        };
        const ComparisonResult res = run_comparison(*pair, s.config, s.recovery, on_record);
        {
            std::ofstream f(dir / "errors.csv");
            write_error_csv(f, res.series);
        }
        {
            std::ofstream f(dir / "identity.csv");
            write_identity_csv(f, res.series);
        }
        if (s.config.domain.cells.size() > 1) {
            std::ofstream f(dir / "cstar_cells.csv");
            write_cell_cstar_csv(f, res.series);
        }
        std::ofstream meta(dir / "meta.txt");
        write_meta(meta, s, pair.get(), &res, "ok");
        std::ostringstream msg;
        const auto& last = res.series.rows.back();
        msg << s.name << ": " << res.series.rows.size() << " rows, l2(T)=" << last.l2 << ", c*(T)=" << last.c_star
            << ", r.e(T)=" << last.rel_err;
        out.message = msg.str();
    } catch (const InvalidInput& e) {
        out = {kInvalid, s.name + ": invalid input: " + e.what()};
    } catch (const SolverError& e) {
        out = {kSolver, s.name + ": solver failure: " + e.what()};
    } catch (const GenerationError& e) {
        out = {kSolver, s.name + ": mesh generation failure: " + e.what()};
    } catch (const std::exception& e) {
        out = {kFailure, s.name + ": " + e.what()};
    }
    if (out.code != kOk) {
        // Flag partial output so it is never mistaken for a finished run.
        std::ofstream meta(dir / "meta.txt");
        write_meta(meta, s, pair.get(), nullptr, "failed: " + out.message);
        std::ofstream(dir / "FAILED") << out.message << "\n";
    }
    return out;
}

int cmd_run(const std::string& name, const SimFlags& f, const CLI::App* app) {
    const std::vector<Job> jobs = jobs_for(name, f, app);
    std::vector<JobOutcome> outcomes(jobs.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(f.jobs, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs.size(); i = next++)
                outcomes[i] = run_job(jobs[i], fs::path(f.out) / jobs[i].subdir, f.snapshot_every);
        });
    }
    for (auto& t : pool) t.join();
    int code = kOk;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        (outcomes[i].code == kOk ? std::cout : std::cerr) << outcomes[i].message << "\n";
        if (outcomes[i].code != kOk && code == kOk) code = outcomes[i].code;
    }
    return code;
}

int cmd_optimize(const std::string& option, double D, double T, double R, double phi, const std::string& out) {
    ObjectiveSpec spec;
    if (option.rfind("continuity:", 0) == 0) {
        spec = ObjectiveSpec::continuity(std::stod(option.substr(11)));
    } else {
        std::size_t used = 0;
        const int id = std::stoi(option, &used);
        if (used != option.size()) throw InvalidInput("option must be 1..6 or continuity:C");
        spec = ObjectiveSpec::option(id);
    }
    spec.horizon = T;
    const FluxParams fp = FluxParams::matched(R, D, phi);
    const OptimResult r = optimize(spec, fp);
    std::cout.precision(10);
    std::cout << "spec      " << spec.describe() << "\np0        " << r.p0 << "\nt0        " << r.t0 << "\nobjective "
              << r.objective << "\niterations " << r.iterations << "\nconverged " << (r.converged ? "yes" : "no") << "\n";
    std::ofstream f(out);
    if (!f) throw InvalidInput("cannot write " + out);
    write_ic_recipe(f, spec, fp, r);
    std::cout << "recipe    " << out << "\n";
    if (!r.converged) {
        std::cerr << "optimizer did not converge: " << r.diagnostics << "\n";
        return kSolver;
    }
    return kOk;
}

int cmd_list() {
    for (const auto& n : builtin_names()) std::cout << n << "\t" << builtin_description(n) << "\n";
    return kOk;
}

int cmd_mesh(const std::string& name, const SimFlags& f, const CLI::App* app) {
    const std::vector<Job> jobs = jobs_for(name, f, app);
    for (const auto& job : jobs) {
        const SimConfig& c = job.scenario.config;
        const fs::path dir = fs::path(f.out) / job.subdir;
        fs::create_directories(dir);
        const MeshPair pair = generate_mesh_pair(c.domain, c.target_h, c.segments);
        {
            std::ofstream m(dir / "full.mesh");
            write_mesh(m, pair.full);
            std::ofstream e(dir / "exclusion.mesh");
            write_mesh(e, pair.exclusion);
            std::ofstream nm(dir / "node_map.txt");
            nm << "node_map " << pair.node_map.size() << "\n";
            for (int v : pair.node_map) nm << v << "\n";
        }
        const MeshReport rf = validate_mesh(pair.full), re = validate_mesh(pair.exclusion);
        std::ofstream rep(dir / "mesh_report.txt");
        for (const auto* r : {&rf, &re}) {
            rep << (r == &rf ? "[full]\n" : "[exclusion]\n");
            for (const auto& ch : r->checks) rep << ch.name << " = " << (ch.passed ? "pass" : "FAIL " + ch.detail) << "\n";
            rep.precision(17);
            rep << "total_area = " << r->total_area << "\nenvironment_area = " << r->environment_area
                << "\nmean_edge_length = " << r->mean_edge_length << "\nmin_triangle_area = " << r->min_triangle_area << "\n\n";
        }
        std::cout << job.scenario.name << ": " << pair.full.node_count() << " nodes, " << pair.full.triangle_count()
                  << " triangles, exclusion mean edge " << re.mean_edge_length << (rf.ok() && re.ok() ? "" : " (INVALID)")
                  << "\n";
        if (!rf.ok() || !re.ok()) return kFailure;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial exclusion vs point source diffusion laboratory"};
    app.set_help_flag("--help", "print this help and exit");  // frees -h for the mesh-size flag
    app.require_subcommand(1);

    SimFlags run_flags;
    std::string run_name;
    auto* run = app.add_subcommand("run", "run a scenario and write errors.csv and meta.txt");
    run->add_option("name", run_name, "scenario name (see `list`)");
    add_sim_flags(run, run_flags);
    run->add_option("--out", run_flags.out, "output directory")->required();
    run->add_option("--jobs", run_flags.jobs, "parallel workers for sweeps")->check(CLI::PositiveNumber);
    run->add_option("--flux-recovery", run_flags.recovery, "consistent (default) or adjacent")
        ->check(CLI::IsMember({"consistent", "adjacent"}));
    run->add_option("--snapshot-every", run_flags.snapshot_every, "write both fields every N steps");

    std::string opt_id, opt_out = "ic_recipe.ini";
    double opt_D = 0.1, opt_T = 40.0, opt_R = 0.5, opt_phi = 1.0;
    auto* opt = app.add_subcommand("optimize-ic", "optimize (p0, t0) for option 1..6 or continuity:C");
    opt->add_option("option", opt_id, "1..6 or continuity:C")->required();
    opt->add_option("--D", opt_D, "diffusivity");
    opt->add_option("--T", opt_T, "objective horizon");
    opt->add_option("--R", opt_R, "cell radius");
    opt->add_option("--phi", opt_phi, "flux density");
    opt->add_option("--out", opt_out, "recipe file to write");

    auto* list = app.add_subcommand("list", "list built-in scenarios");

    SimFlags mesh_flags;
    std::string mesh_name;
    auto* mesh = app.add_subcommand("mesh", "generate and export the mesh pair of a scenario");
    mesh->add_option("name", mesh_name, "scenario name");
    add_sim_flags(mesh, mesh_flags);
    mesh->add_option("--out", mesh_flags.out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(run_name, run_flags, run);
        if (*opt) return cmd_optimize(opt_id, opt_D, opt_T, opt_R, opt_phi, opt_out);
        if (*list) return cmd_list();
        if (*mesh) return cmd_mesh(mesh_name, mesh_flags, mesh);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid argument: " << e.what() << "\n";
        return kInvalid;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolver;
    } catch (const GenerationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
