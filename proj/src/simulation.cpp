#include "pslab/simulation.hpp"

#include <cmath>
#include <sstream>

#include "pslab/errors.hpp"

namespace pslab {

int SimConfig::steps() const { return static_cast<int>(std::lround(T / dt)); }

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    if (!(T >= dt)) throw InvalidInput("T must be at least dt");
    if (!(D > 0.0)) throw InvalidInput("D must be positive");
    if (!(target_h > 0.0)) throw InvalidInput("target_h must be positive");
    if (segments < 16) throw InvalidInput("segments must be at least 16");
    if (stride < 1) throw InvalidInput("stride must be at least 1");
    if (!(background >= 0.0)) throw InvalidInput("background C must be non-negative");
    validate_domain(domain);
    if (ic_kind == ICKind::GaussianExtension) {
        if (domain.cells.empty()) throw InvalidInput("Gaussian extension needs at least one cell");
        if (gaussian.size() != 1 && gaussian.size() != domain.cells.size())
            throw InvalidInput("Gaussian extension needs one parameter set, or one per cell");
        for (const auto& g : gaussian)
            if (!(g.t0 > 0.0) || !(g.p0 >= 0.0) || !std::isfinite(g.p0))
                throw InvalidInput("Gaussian parameters need t0 > 0 and finite p0 >= 0");
    }
}

std::vector<std::string> SimConfig::warnings() const {
    std::vector<std::string> w;
    if (D < 0.1 || D > 10.0) w.push_back("D outside the studied range [0.1, 10]");
    for (std::size_t i = 0; i < domain.cells.size(); ++i) {
        const double R = domain.cells[i].radius;
        if (dt > R * R / D) {
            std::ostringstream os;
            os << "dt > R^2/D for cell " << i << "; the delay phenomenon is masked at this step size";
            w.push_back(os.str());
        }
    }
    if (std::abs(T / dt - std::round(T / dt)) > 1e-9 * (T / dt)) w.push_back("T is not a multiple of dt; horizon rounded");
    return w;
}

const GaussianICParams& SimConfig::gaussian_for(std::size_t cell) const {
    return gaussian.size() == 1 ? gaussian.front() : gaussian.at(cell);
}

Nondimensional nondimensionalize(double r, double L, double D_phys, double phi0, double tau0) {
    if (!(r > 0.0) || !(L > 0.0) || !(D_phys > 0.0) || !(phi0 > 0.0) || !(tau0 > 0.0))
        throw InvalidInput("nondimensionalize needs positive inputs");
    Nondimensional n{};
    n.length_scale = 1.0 / (2.0 * r);
    n.half_width = L / (2.0 * r);
    n.cell_radius = r / (2.0 * r);
    n.D = D_phys * tau0 / (4.0 * r * r);
    n.u_star = phi0 * tau0 / (2.0 * r);
    n.flux_density = phi0 * tau0 / (2.0 * r * n.u_star);
    n.source_rate = 2.0 * M_PI * r * phi0 * tau0 / (n.u_star * 4.0 * r * r);
    return n;
}

std::pair<NodalField, NodalField> build_initial_condition(const MeshPair& pair, const SimConfig& config) {
    config.validate();
    const double c = config.ic_kind == ICKind::Zero ? 0.0 : config.background;
    NodalField excl = NodalField::constant(pair.exclusion, c);
    NodalField full = NodalField::constant(pair.full, c);
    if (config.ic_kind != ICKind::GaussianExtension) return {excl, full};

    if (pair.polygon_nodes.size() != config.domain.cells.size())
        throw InvalidInput("mesh pair and configuration disagree on the number of cells");
    const Mesh& m = pair.full;
    std::vector<char> touches_env(m.node_count(), 0);
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
        if (m.regions[t].is_environment())
            for (int v : m.triangles[t]) touches_env[static_cast<std::size_t>(v)] = 1;
    std::vector<char> done(m.node_count(), 0);
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const Region r = m.regions[t];
        if (r.is_environment()) continue;
        const auto ci = static_cast<std::size_t>(r.cell);
        const CellSpec& cell = config.domain.cells.at(ci);
        const GaussianICParams& g = config.gaussian_for(ci);
        for (int v : m.triangles[t]) {
            const auto k = static_cast<std::size_t>(v);
            if (touches_env[k] || done[k]) continue;
            done[k] = 1;
            full.values[k] = g.p0 * fundamental_solution(distance(m.nodes[k], cell.center), g.t0, config.D);
        }
    }
    return {excl, full};
}

ModelStepper::ModelStepper(ModelKind kind, const MeshPair& pair, const SimConfig& config, NodalField initial)
    : kind_(kind), mesh_(kind == ModelKind::SpatialExclusion ? &pair.exclusion : &pair.full), dt_(config.dt) {
    check_field(initial, *mesh_);
    M_ = assemble_mass(*mesh_);
    K_ = assemble_stiffness(*mesh_);
    load_.assign(mesh_->node_count(), 0.0);
    const auto& cells = config.domain.cells;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::vector<double> b =
            kind == ModelKind::SpatialExclusion
                ? assemble_boundary_flux_load(*mesh_, BoundaryMarker::cell_boundary(static_cast<int>(i)), cells[i].flux_density)
                : assemble_point_source_load(*mesh_, cells[i].center, cells[i].source_rate());
        for (std::size_t k = 0; k < b.size(); ++k) load_[k] += b[k];
    }
    for (double v : load_) influx_ += v;
    be_ = std::make_unique<BackwardEuler>(M_, K_, config.D, config.dt, config.solver);
    u_ = std::move(initial);
    u_prev_ = u_;
}

void ModelStepper::advance() {
    std::vector<double> next = be_->step(u_.values, load_);
    u_prev_ = std::move(u_);
    u_ = NodalField(std::move(next), mesh_->id);
    ++step_;
}

namespace {

TimeSeries run_model(ModelKind kind, const MeshPair& pair, const SimConfig& config) {
    auto [excl, full] = build_initial_condition(pair, config);
    ModelStepper stepper(kind, pair, config, kind == ModelKind::SpatialExclusion ? std::move(excl) : std::move(full));
    TimeSeries ts;
    ts.model = kind;
    ts.times.push_back(0.0);
    ts.fields.push_back(stepper.state());
    const int n = config.steps();
    for (int s = 1; s <= n; ++s) {
        stepper.advance();
        if (s % config.stride == 0) {
            ts.times.push_back(s * config.dt);
            ts.fields.push_back(stepper.state());
        }
    }
    return ts;
}

}  // namespace

TimeSeries run_spatial_exclusion(const MeshPair& pair, const SimConfig& config) {
    return run_model(ModelKind::SpatialExclusion, pair, config);
}

TimeSeries run_point_source(const MeshPair& pair, const SimConfig& config) {
    return run_model(ModelKind::PointSource, pair, config);
}

}  // namespace pslab
