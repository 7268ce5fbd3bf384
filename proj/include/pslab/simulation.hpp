#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pslab/analytic.hpp"
#include "pslab/fem.hpp"
#include "pslab/mesh.hpp"

namespace pslab {

enum class ICKind { Zero, Constant, GaussianExtension };

struct SimConfig {
    double D = 0.1;
    double dt = 0.04;
    double T = 40.0;
    double target_h = 0.127;
    int segments = 64;
    ICKind ic_kind = ICKind::Zero;
    double background = 0.0;                 // C for Constant and GaussianExtension
    std::vector<GaussianICParams> gaussian;  // one per cell, or one shared by all cells
    DomainSpec domain;
    int stride = 1;
    SolverSettings solver;

    /// Number of time steps, round(T / dt).
    int steps() const;
    /// Throws InvalidInput on hard violations.
    void validate() const;
    /// Soft issues (D outside [0.1, 10], dt > R^2 / D, ...).
    std::vector<std::string> warnings() const;
    /// Gaussian parameters used for cell i.
    const GaussianICParams& gaussian_for(std::size_t cell) const;
};

/// Dimensionless quantities derived from physical cell radius r, domain
/// half-width L, diffusivity D, flux density phi0 and time scale tau0.
struct Nondimensional {
    double length_scale;   // xi = x * length_scale = x / (2 r)
    double half_width;     // L / (2 r)
    double cell_radius;    // always 1/2
    double D;              // D tau0 / (4 r^2)
    double u_star;         // density scale with phi0 tau0 / (2 r u*) = 1
    double flux_density;   // always 1
    double source_rate;    // 2 pi r phi0 tau0 / (u* 4 r^2) = pi
};
Nondimensional nondimensionalize(double r, double L, double D_phys, double phi0, double tau0);

enum class ModelKind { SpatialExclusion, PointSource };

struct TimeSeries {
    ModelKind model = ModelKind::SpatialExclusion;
    std::vector<double> times;
    std::vector<NodalField> fields;
};

/// Initial fields (exclusion mesh, full mesh).
std::pair<NodalField, NodalField> build_initial_condition(const MeshPair& pair, const SimConfig& config);

/// Holds the matrices, load and state of one model; `advance` takes one step.
class ModelStepper {
public:
    ModelStepper(ModelKind kind, const MeshPair& pair, const SimConfig& config, NodalField initial);
    ModelStepper(const ModelStepper&) = delete;
    ModelStepper& operator=(const ModelStepper&) = delete;

    void advance();
    ModelKind kind() const { return kind_; }
    const Mesh& mesh() const { return *mesh_; }
    const NodalField& state() const { return u_; }
    const NodalField& previous() const { return u_prev_; }
    double time() const { return step_ * dt_; }
    int step_index() const { return step_; }
    const SparseMatrix& mass() const { return M_; }
    const SparseMatrix& stiffness() const { return K_; }
    const std::vector<double>& load() const { return load_; }
    /// 1^T load, injected mass per unit time.
    double influx_rate() const { return influx_; }
    const BackwardEuler& integrator() const { return *be_; }

private:
    ModelKind kind_;
    const Mesh* mesh_;
    SparseMatrix M_;
    SparseMatrix K_;
    std::vector<double> load_;
    double influx_ = 0.0;
    double dt_;
    std::unique_ptr<BackwardEuler> be_;
    NodalField u_;
    NodalField u_prev_;
    int step_ = 0;
};

/// Evolves the spatial exclusion model on pair.exclusion.
TimeSeries run_spatial_exclusion(const MeshPair& pair, const SimConfig& config);
/// Evolves the point source model on pair.full.
TimeSeries run_point_source(const MeshPair& pair, const SimConfig& config);

}  // namespace pslab
