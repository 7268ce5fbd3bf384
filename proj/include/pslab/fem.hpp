#pragma once

#include <cstdint>
#include <vector>

#include "pslab/mesh.hpp"
#include "pslab/sparse.hpp"

namespace pslab {

/// One scalar per node of the mesh identified by `mesh_id`.
struct NodalField {
    std::vector<double> values;
    std::uint64_t mesh_id = 0;

    NodalField() = default;
    NodalField(std::vector<double> v, std::uint64_t id) : values(std::move(v)), mesh_id(id) {}
    static NodalField constant(const Mesh& mesh, double c) { return {std::vector<double>(mesh.node_count(), c), mesh.id}; }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

/// Throws InvalidInput unless `f` has the right length, tag and finite values.
void check_field(const NodalField& f, const Mesh& mesh);

/// Selects which triangles take part in assembly.
struct RegionFilter {
    enum class Kind { All, Environment, Cell } kind = Kind::All;
    int cell = -1;

    static RegionFilter all() { return {}; }
    static RegionFilter environment() { return {Kind::Environment, -1}; }
    static RegionFilter cell_interior(int i) { return {Kind::Cell, i}; }
    bool accepts(Region r) const;
};

/// M_ij = integral of phi_i phi_j over the filtered region (exact P1 element matrix).
SparseMatrix assemble_mass(const Mesh& mesh, RegionFilter filter = RegionFilter::all());

/// K_ij = integral of grad phi_i . grad phi_j over the filtered region.
SparseMatrix assemble_stiffness(const Mesh& mesh, RegionFilter filter = RegionFilter::all());

/// b_j = flux_density * (sum of lengths of marker edges touching j) / 2.
std::vector<double> assemble_boundary_flux_load(const Mesh& mesh, BoundaryMarker marker, double flux_density);

/// b_j = rate * lambda_j(x_c) on the triangle containing x_c.
std::vector<double> assemble_point_source_load(const Mesh& mesh, Point x_c, double rate);

struct SolverSettings {
    double relative_tolerance = 1e-10;
    double iteration_cap_factor = 10.0;  // cap = factor * sqrt(n)
};

/// Backward-Euler integrator for M du/dt + D K u = load with a fixed step.
/// The system matrix and its Jacobi preconditioner are built once.
class BackwardEuler {
public:
    BackwardEuler(const SparseMatrix& M, const SparseMatrix& K, double D, double dt,
                  SolverSettings settings = {});

    /// Solves (M + dt D K) u_{n+1} = M u_n + dt load; u_n is the initial guess.
    /// Throws SolverError when CG does not reach the tolerance.
    std::vector<double> step(const std::vector<double>& u_n, const std::vector<double>& load) const;

    const SparseMatrix& system() const { return A_; }
    int iteration_cap() const { return cap_; }
    double dt() const { return dt_; }
    double diffusivity() const { return D_; }

    /// Statistics of the most recent solve.
    const CgResult& last_solve() const { return last_; }
    int max_iterations_seen() const { return max_seen_; }

private:
    const SparseMatrix& M_;
    SparseMatrix A_;
    std::vector<double> inv_diag_;
    double D_;
    double dt_;
    double tol_;
    int cap_;
    mutable CgResult last_;
    mutable int max_seen_ = 0;
    mutable std::vector<double> rhs_;
};

/// Single step convenience wrapper around BackwardEuler.
NodalField backward_euler_step(const SparseMatrix& M, const SparseMatrix& K, double D, double dt,
                               const NodalField& u_n, const std::vector<double>& load);

/// 1^T M u
double total_mass(const SparseMatrix& M, const std::vector<double>& u);

}  // namespace pslab
