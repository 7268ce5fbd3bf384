#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pslab/fem.hpp"
#include "pslab/mesh.hpp"
#include "pslab/simulation.hpp"

namespace pslab {

/// Exact nodal copy of a full-mesh field onto the exclusion mesh.
NodalField restrict_field(const NodalField& full, const MeshPair& pair);
/// Exclusion-mesh field extended by zero to the full mesh.
NodalField extend_by_zero(const NodalField& exclusion, const MeshPair& pair);

struct NormDiff {
    double l2 = 0.0;
    double grad_l2 = 0.0;
    double h1 = 0.0;
};

/// Norms of w = u_S - u_P on the exclusion mesh: sqrt(w^T M w), sqrt(w^T K w)
/// and the root of their squares' sum.
NormDiff norm_diff(const NodalField& u_s, const NodalField& u_p_restricted, const SparseMatrix& M_excl,
                   const SparseMatrix& K_excl);

enum class FluxRecovery {
    /// Nodal weak residual M (u^{n+1} - u^n) / dt + D K u^{n+1} on the exclusion
    /// mesh, divided by the lumped boundary length and averaged per edge.
    Consistent,
    /// D * (constant gradient of the environment-side triangle) . n.
    AdjacentGradient,
};

/// Cell-boundary geometry on the exclusion mesh, shared by the flux recoveries.
class BoundaryFluxOperator {
public:
    explicit BoundaryFluxOperator(const MeshPair& pair);

    std::size_t cell_count() const { return cells_.size(); }
    const std::vector<double>& edge_lengths(std::size_t cell) const { return cells_[cell].length; }
    double perimeter(std::size_t cell) const;
    double total_perimeter() const;

    /// Per-edge flux into the environment for cell `cell`; `u` on the exclusion mesh.
    std::vector<double> adjacent_gradient(const NodalField& u, std::size_t cell, double D) const;
    std::vector<double> consistent(const NodalField& u_new, const NodalField& u_old, std::size_t cell, double D,
                                   double dt, const SparseMatrix& M_excl, const SparseMatrix& K_excl) const;

    /// Edge midpoint average of a nodal exclusion field.
    std::vector<double> edge_average(const NodalField& u, std::size_t cell) const;

private:
    struct CellEdges {
        std::vector<std::array<int, 2>> nodes;  // exclusion indices
        std::vector<double> length;
        std::vector<Point> inward;              // unit normal pointing into the cell
        std::vector<int> triangle;              // environment-side triangle
        std::vector<int> lumped_nodes;          // distinct boundary nodes
        std::vector<double> lumped_length;      // half the adjacent edge lengths
        std::vector<std::array<int, 2>> edge_slots;  // positions of the edge ends in lumped_nodes
    };
    const Mesh& mesh_;
    std::vector<CellEdges> cells_;
};

/// Adjacent-triangle flux D g_T . n for each Cell(cell) boundary edge of a
/// full-mesh field. Throws AssemblyError on an edge without an environment triangle.
std::vector<double> boundary_flux(const NodalField& u_p_full, const MeshPair& pair, int cell, double D);

/// Trapezoid-in-time accumulation of sum_e (phi - q_e)^2 len_e.
/// `flux_history[m]` holds the edge fluxes at t = m dt.
std::vector<double> c_star(const std::vector<std::vector<double>>& flux_history, const std::vector<double>& edge_lengths,
                           double phi, double dt);

/// sqrt(perimeter) * numerator_integral / (env_area C + emission_rate t).
/// Throws InvalidInput when the denominator is zero (C = 0 at t = 0).
double relative_error(double numerator_integral, double perimeter, double env_area, double C, double emission_rate,
                      double t);

struct IdentityTerms {
    double energy_rate = 0.0;   // (|w_n|^2 - |w_{n-1}|^2) / (2 dt)
    double dissipation = 0.0;   // D w_n^T K w_n
    double boundary = 0.0;      // sum_e w_e (phi - q_e) len_e
    double residual() const { return energy_rate + dissipation - boundary; }
    double magnitude() const;   // |energy_rate| + |dissipation| + |boundary|
};

/// Discrete energy identity terms for one step.
IdentityTerms energy_identity_terms(const NodalField& w_prev, const NodalField& w_now, const SparseMatrix& M_excl,
                                    const SparseMatrix& K_excl, double D, double dt,
                                    const std::vector<double>& w_on_edges, const std::vector<double>& flux_deviation,
                                    const std::vector<double>& edge_lengths);

struct ErrorRow {
    double t = 0.0;
    double l2 = 0.0;
    double h1 = 0.0;
    double grad_l2 = 0.0;
    double c_star = 0.0;
    double rel_err = 0.0;
    double mass_s = 0.0;
    double mass_p = 0.0;
    IdentityTerms identity;
};

struct ErrorSeries {
    std::vector<ErrorRow> rows;
    std::vector<std::vector<double>> c_star_per_cell;  // [row][cell]
};

/// The header line `t,l2,h1,gradl2,c_star,rel_err,mass_s,mass_p,identity_residual`,
/// then one row per record with 12 significant digits.
void write_error_csv(std::ostream& os, const ErrorSeries& series);
/// Identity terms per record: `t,energy_rate,dissipation,boundary,residual`.
void write_identity_csv(std::ostream& os, const ErrorSeries& series);
/// Per-cell c*: `t,cell0,cell1,...`.
void write_cell_cstar_csv(std::ostream& os, const ErrorSeries& series);

/// Incremental evaluation of all quantifiers while both models step in lock-step.
class MetricsAccumulator {
public:
    MetricsAccumulator(const MeshPair& pair, const SimConfig& config, const SparseMatrix& M_excl,
                       const SparseMatrix& K_excl, FluxRecovery recovery);

    /// Initial fields; always produces a record at t = 0.
    void start(const NodalField& u_s0, const NodalField& u_p0_full);
    /// Fields after one more step; appends a record when `record`.
    void step(const NodalField& u_s, const NodalField& u_p_full, bool record);

    const ErrorSeries& series() const { return series_; }
    ErrorSeries take() { return std::move(series_); }
    /// Sum of phi-weighted deviation norm integral (numerator of r.e without the sqrt(perimeter)).
    double deviation_integral() const { return dev_integral_; }
    /// Largest |sum_e |dev| len - sqrt(perimeter) * |dev|_{L2}| violation seen (should be <= 0).
    double worst_l1_l2_violation() const { return worst_l1l2_; }

private:
    void append(double t, const NodalField& u_s, const NodalField& u_p, const IdentityTerms& id);
    std::vector<std::vector<double>> fluxes(const NodalField& u_p, const NodalField* u_p_old) const;
    // Returns the squared L2 deviation norm per cell and updates the L1/L2 bound check.
    std::vector<double> deviation_sq(const std::vector<std::vector<double>>& q);

    const MeshPair& pair_;
    SimConfig config_;
    const SparseMatrix& M_;
    const SparseMatrix& K_;
    FluxRecovery recovery_;
    BoundaryFluxOperator op_;
    double env_area_ = 0.0;
    double emission_rate_ = 0.0;
    int step_ = 0;
    NodalField w_prev_;
    NodalField up_prev_;
    std::vector<double> dev_sq_prev_;  // per cell
    double dev_norm_prev_ = 0.0;
    std::vector<double> cstar_cell_;
    double dev_integral_ = 0.0;
    double worst_l1l2_ = -1.0;
    ErrorSeries series_;
};

/// Post-processing over recorded series. The consistent recovery needs every
/// step (stride 1).
ErrorSeries error_series(const TimeSeries& s, const TimeSeries& p, const MeshPair& pair, const SimConfig& config,
                         FluxRecovery recovery = FluxRecovery::Consistent);

struct ComparisonStats {
    int max_cg_iterations_s = 0;
    int max_cg_iterations_p = 0;
    int cg_cap = 0;
    double max_mass_drift_s = 0.0;  // relative to the analytic influx line
    double max_mass_drift_p = 0.0;
    double influx_s = 0.0;
    double influx_p = 0.0;
    double worst_l1_l2_violation = 0.0;
};

struct ComparisonResult {
    ErrorSeries series;
    ComparisonStats stats;
    std::vector<std::string> warnings;
};

/// Runs both models in lock-step and streams the metrics; only recorded rows
/// are kept. `on_record` (optional) sees every recorded step's fields.
ComparisonResult run_comparison(
    const MeshPair& pair, const SimConfig& config, FluxRecovery recovery = FluxRecovery::Consistent,
    const std::function<void(int step, const NodalField& u_s, const NodalField& u_p)>& on_record = {});

}  // namespace pslab
