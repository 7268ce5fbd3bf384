#include "pslab/fem.hpp"

#include <cmath>
#include <sstream>

#include "pslab/errors.hpp"

namespace pslab {

void check_field(const NodalField& f, const Mesh& mesh) {
    if (f.mesh_id != mesh.id) throw InvalidInput("field does not live on this mesh");
    if (f.size() != mesh.node_count()) throw InvalidInput("field length differs from node count");
    for (double v : f.values)
        if (!std::isfinite(v)) throw InvalidInput("field contains non-finite values");
}

bool RegionFilter::accepts(Region r) const {
    switch (kind) {
        case Kind::All: return true;
        case Kind::Environment: return r.is_environment();
        case Kind::Cell: return r.cell == cell;
    }
    return false;
}

namespace {

struct Element {
    std::array<int, 3> v;
    std::array<Point, 3> p;
    double area;
};

Element element(const Mesh& mesh, std::size_t t) {
    Element e;
    e.v = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) e.p[static_cast<std::size_t>(k)] = mesh.nodes[static_cast<std::size_t>(e.v[static_cast<std::size_t>(k)])];
    e.area = mesh.signed_area(t);
    if (!(e.area > 0.0)) {
        std::ostringstream os;
        os << "degenerate or inverted triangle " << t << " (signed area " << e.area << ")";
        throw AssemblyError(os.str());
    }
    return e;
}

template <class Local>
SparseMatrix assemble(const Mesh& mesh, RegionFilter filter, Local local) {
    std::vector<Triplet> trip;
    trip.reserve(mesh.triangle_count() * 9);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const Region r = t < mesh.regions.size() ? mesh.regions[t] : Region::environment();
        if (!filter.accepts(r)) continue;
        const Element e = element(mesh, t);
        double m[3][3];
        local(e, m);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.push_back({e.v[static_cast<std::size_t>(i)], e.v[static_cast<std::size_t>(j)], m[i][j]});
    }
    return SparseMatrix::from_triplets(mesh.node_count(), std::move(trip), true);
}

}  // namespace

SparseMatrix assemble_mass(const Mesh& mesh, RegionFilter filter) {
    return assemble(mesh, filter, [](const Element& e, double m[3][3]) {
        const double a = e.area / 12.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = i == j ? 2.0 * a : a;
    });
}

SparseMatrix assemble_stiffness(const Mesh& mesh, RegionFilter filter) {
    return assemble(mesh, filter, [](const Element& e, double m[3][3]) {
        // grad phi_i = perp(p_{i+2} - p_{i+1}) / (2A); K_ij = (e_i . e_j) / (4A)
        Point edge[3];
        for (int i = 0; i < 3; ++i) edge[i] = e.p[static_cast<std::size_t>((i + 2) % 3)] - e.p[static_cast<std::size_t>((i + 1) % 3)];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = dot(edge[i], edge[j]) / (4.0 * e.area);
    });
}

std::vector<double> assemble_boundary_flux_load(const Mesh& mesh, BoundaryMarker marker, double flux_density) {
    std::vector<double> b(mesh.node_count(), 0.0);
    bool found = false;
    for (const auto& e : mesh.boundary_edges) {
        if (!(e.marker == marker)) continue;
        found = true;
        const double half = 0.5 * flux_density *
                            distance(mesh.nodes[static_cast<std::size_t>(e.nodes[0])], mesh.nodes[static_cast<std::size_t>(e.nodes[1])]);
        b[static_cast<std::size_t>(e.nodes[0])] += half;
        b[static_cast<std::size_t>(e.nodes[1])] += half;
    }
    if (!found) throw InvalidInput("no boundary edges carry marker Cell(" + std::to_string(marker.cell) + ")");
    return b;
}

std::vector<double> assemble_point_source_load(const Mesh& mesh, Point x_c, double rate) {
    std::vector<double> b(mesh.node_count(), 0.0);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        if (mesh.nodes[i] == x_c) {
            b[i] = rate;
            return b;
        }
    }
    // Triangle with the largest minimum barycentric coordinate; accepts points
    // on edges up to rounding.
    int best = -1;
    double best_min = -1e-12;
    std::array<double, 3> best_lambda{};
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Point a = mesh.nodes[static_cast<std::size_t>(tri[0])];
        const Point p1 = mesh.nodes[static_cast<std::size_t>(tri[1])];
        const Point p2 = mesh.nodes[static_cast<std::size_t>(tri[2])];
        const double twice = cross(p1 - a, p2 - a);
        if (!(twice > 0.0)) continue;
        const std::array<double, 3> l{cross(p1 - x_c, p2 - x_c) / twice, cross(p2 - x_c, a - x_c) / twice,
                                      cross(a - x_c, p1 - x_c) / twice};
        const double mn = std::min({l[0], l[1], l[2]});
        if (mn > best_min) {
            best_min = mn;
            best = static_cast<int>(t);
            best_lambda = l;
        }
    }
    if (best < 0) throw InvalidInput("point source lies outside the mesh");
    const auto& tri = mesh.triangles[static_cast<std::size_t>(best)];
    // Normalize so the entries sum to the rate exactly in exact arithmetic.
    const double s = best_lambda[0] + best_lambda[1] + best_lambda[2];
    for (int k = 0; k < 3; ++k) b[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])] += rate * best_lambda[static_cast<std::size_t>(k)] / s;
    return b;
}

BackwardEuler::BackwardEuler(const SparseMatrix& M, const SparseMatrix& K, double D, double dt, SolverSettings settings)
    : M_(M), D_(D), dt_(dt), tol_(settings.relative_tolerance) {
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    if (!(D >= 0.0)) throw InvalidInput("diffusivity must be non-negative");
    if (M.dimension() != K.dimension()) throw InvalidInput("M and K dimensions differ");
    A_ = SparseMatrix::combine(1.0, M, dt * D, K);
    inv_diag_ = A_.diagonal();
    for (auto& d : inv_diag_) {
        if (!(d > 0.0)) throw InvalidInput("system matrix has a non-positive diagonal entry");
        d = 1.0 / d;
    }
    cap_ = std::max(1, static_cast<int>(std::ceil(settings.iteration_cap_factor * std::sqrt(static_cast<double>(M.dimension())))));
}

std::vector<double> BackwardEuler::step(const std::vector<double>& u_n, const std::vector<double>& load) const {
    const std::size_t n = A_.dimension();
    if (u_n.size() != n || load.size() != n) throw InvalidInput("vector length differs from system dimension");
    M_.multiply(u_n, rhs_);
    for (std::size_t i = 0; i < n; ++i) rhs_[i] += dt_ * load[i];
    std::vector<double> x = u_n;
    last_ = conjugate_gradient(A_, inv_diag_, rhs_, x, tol_, cap_);
    max_seen_ = std::max(max_seen_, last_.iterations);
    if (!last_.converged) {
        std::ostringstream os;
        os << "CG did not converge: relative residual " << last_.relative_residual << " after " << last_.iterations
           << " iterations (cap " << cap_ << ")";
        throw SolverError(os.str(), last_.relative_residual, last_.iterations);
    }
    return x;
}

NodalField backward_euler_step(const SparseMatrix& M, const SparseMatrix& K, double D, double dt,
                               const NodalField& u_n, const std::vector<double>& load) {
    BackwardEuler be(M, K, D, dt);
    return {be.step(u_n.values, load), u_n.mesh_id};
}

double total_mass(const SparseMatrix& M, const std::vector<double>& u) {
    std::vector<double> Mu;
    M.multiply(u, Mu);
    double s = 0.0;
    for (double v : Mu) s += v;
    return s;
}

}  // namespace pslab
