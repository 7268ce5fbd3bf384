#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pslab/geometry.hpp"

namespace pslab {

/// Triangle region: the environment, or the interior of cell `cell`.
struct Region {
    int cell = -1;

    static constexpr Region environment() { return {-1}; }
    static constexpr Region cell_interior(int i) { return {i}; }
    constexpr bool is_environment() const { return cell < 0; }
    friend constexpr bool operator==(Region, Region) = default;
};

/// Boundary edge marker: the outer square, or the boundary polygon of cell `cell`.
struct BoundaryMarker {
    int cell = -1;

    static constexpr BoundaryMarker outer() { return {-1}; }
    static constexpr BoundaryMarker cell_boundary(int i) { return {i}; }
    constexpr bool is_outer() const { return cell < 0; }
    friend constexpr bool operator==(BoundaryMarker, BoundaryMarker) = default;
};

struct BoundaryEdge {
    std::array<int, 2> nodes{};
    BoundaryMarker marker;
};

/// Conforming P1 triangulation. Triangles are counter-clockwise.
struct Mesh {
    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Region> regions;  // one per triangle
    std::vector<BoundaryEdge> boundary_edges;
    std::uint64_t id = 0;  // identity tag carried by fields living on this mesh

    std::size_t node_count() const { return nodes.size(); }
    std::size_t triangle_count() const { return triangles.size(); }

    /// Signed area of triangle t (positive for counter-clockwise).
    double signed_area(std::size_t t) const;

    /// Boundary edges carrying the given marker, in storage order.
    std::vector<BoundaryEdge> edges_with(BoundaryMarker marker) const;

    /// Mean length over all distinct edges.
    double mean_edge_length() const;

    /// Assigns a fresh process-unique identity tag.
    void assign_new_id();
};

/// Full-domain mesh together with the environment-only submesh obtained by
/// dropping cell-interior triangles. Shared nodes have identical coordinates.
struct MeshPair {
    Mesh full;
    Mesh exclusion;
    std::vector<int> node_map;  // exclusion node index -> full node index

    std::vector<int> center_nodes;                 // full index of each cell center
    std::vector<std::vector<int>> polygon_nodes;   // full indices, counter-clockwise per cell
};

/// Builds a MeshPair: background grid of spacing ~target_h, circle polygons of
/// `segments_per_circle` vertices, cell centers as nodes, Delaunay
/// triangulation, and centroid-in-disk region tagging.
MeshPair generate_mesh_pair(const DomainSpec& domain, double target_h, int segments_per_circle = 64);

struct MeshCheck {
    std::string name;
    bool passed = true;
    std::vector<int> offending;  // triangle or edge indices
    std::string detail;
};

struct MeshReport {
    std::vector<MeshCheck> checks;
    double total_area = 0.0;
    double environment_area = 0.0;
    std::vector<double> cell_area;
    double min_triangle_area = 0.0;
    double max_triangle_area = 0.0;
    double mean_edge_length = 0.0;

    bool ok() const;
    const MeshCheck& check(const std::string& name) const;
};

/// Checks positive orientation, conformity, cell-boundary polygon structure
/// and boundary-edge adjacency. Never throws.
MeshReport validate_mesh(const Mesh& mesh);

// Plain-text mesh format:
//   nodes N triangles T edges E
//   x y                (N lines, 17 significant digits)
//   i j k tag          (T lines; tag 0 = environment, i+1 = interior of cell i)
//   i j marker         (E lines; marker 0 = outer, i+1 = boundary of cell i)
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

/// Nodal values, one per node, written as `field N` followed by N lines.
void write_field(std::ostream& os, const std::vector<double>& values);
std::vector<double> read_field(std::istream& is);

}  // namespace pslab
