#include "pslab/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "delaunay.hpp"
#include "pslab/errors.hpp"

namespace pslab {

// ---------------------------------------------------------------------------
// Domain geometry

double min_clearance(const DomainSpec& domain) {
    double best = std::numeric_limits<double>::infinity();
    const double L = domain.half_width;
    for (std::size_t i = 0; i < domain.cells.size(); ++i) {
        const CellSpec& c = domain.cells[i];
        const double to_outer = std::min({L - c.center.x, L + c.center.x, L - c.center.y,
                                          L + c.center.y}) -
                                c.radius;
        best = std::min(best, to_outer);
        for (std::size_t j = i + 1; j < domain.cells.size(); ++j) {
            const CellSpec& d = domain.cells[j];
            best = std::min(best, distance(c.center, d.center) - c.radius - d.radius);
        }
    }
    return best;
}

void validate_domain(const DomainSpec& domain) {
    if (!(domain.half_width > 0.0)) throw InvalidInput("domain half_width must be positive");
    for (std::size_t i = 0; i < domain.cells.size(); ++i) {
        const CellSpec& c = domain.cells[i];
        if (!(c.radius > 0.0))
            throw InvalidInput("cell " + std::to_string(i) + ": radius must be positive");
        if (!(c.flux_density >= 0.0))
            throw InvalidInput("cell " + std::to_string(i) + ": flux density must be >= 0");
    }
    if (!domain.cells.empty() && !(min_clearance(domain) > 0.0))
        throw InvalidInput("cells must lie strictly inside the domain and must not touch each other");
}

// ---------------------------------------------------------------------------
// Mesh basics

namespace {

std::atomic<std::uint64_t> g_next_mesh_id{1};

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

double segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return distance(p, a + s * ab);
}

}  // namespace

double Mesh::signed_area(std::size_t t) const {
    const auto& tri = triangles[t];
    const Point a = nodes[static_cast<std::size_t>(tri[0])];
    const Point b = nodes[static_cast<std::size_t>(tri[1])];
    const Point c = nodes[static_cast<std::size_t>(tri[2])];
    return 0.5 * cross(b - a, c - a);
}

std::vector<BoundaryEdge> Mesh::edges_with(BoundaryMarker marker) const {
    std::vector<BoundaryEdge> out;
    for (const auto& e : boundary_edges)
        if (e.marker == marker) out.push_back(e);
    return out;
}

double Mesh::mean_edge_length() const {
    std::unordered_map<std::uint64_t, double> seen;
    seen.reserve(triangles.size() * 2);
    for (const auto& tri : triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = tri[static_cast<std::size_t>(k)];
            const int b = tri[static_cast<std::size_t>((k + 1) % 3)];
            seen.emplace(edge_key(a, b), distance(nodes[static_cast<std::size_t>(a)],
                                                  nodes[static_cast<std::size_t>(b)]));
        }
    }
    if (seen.empty()) return 0.0;
    // Sum in key order so the result does not depend on hash layout.
    std::vector<std::pair<std::uint64_t, double>> sorted(seen.begin(), seen.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (const auto& [k, len] : sorted) sum += len;
    return sum / static_cast<double>(sorted.size());
}

void Mesh::assign_new_id() { id = g_next_mesh_id.fetch_add(1); }

// ---------------------------------------------------------------------------
// Validation

bool MeshReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const MeshCheck& c) { return c.passed; });
}

const MeshCheck& MeshReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no mesh check named " + name);
}

MeshReport validate_mesh(const Mesh& mesh) {
    MeshReport rep;
    const std::size_t nt = mesh.triangle_count();

    MeshCheck positive{"positive_area", true, {}, ""};
    rep.min_triangle_area = nt ? std::numeric_limits<double>::infinity() : 0.0;
    int max_cell = -1;
    for (const auto& r : mesh.regions) max_cell = std::max(max_cell, r.cell);
    for (const auto& e : mesh.boundary_edges) max_cell = std::max(max_cell, e.marker.cell);
    rep.cell_area.assign(static_cast<std::size_t>(max_cell + 1), 0.0);
    for (std::size_t t = 0; t < nt; ++t) {
        const double a = mesh.signed_area(t);
        if (!(a > 0.0)) {
            positive.passed = false;
            positive.offending.push_back(static_cast<int>(t));
        }
        rep.total_area += a;
        rep.min_triangle_area = std::min(rep.min_triangle_area, a);
        rep.max_triangle_area = std::max(rep.max_triangle_area, a);
        const Region r = t < mesh.regions.size() ? mesh.regions[t] : Region::environment();
        if (r.is_environment())
            rep.environment_area += a;
        else
            rep.cell_area[static_cast<std::size_t>(r.cell)] += a;
    }
    if (!positive.passed)
        positive.detail = std::to_string(positive.offending.size()) + " triangle(s) with non-positive area";

    // Directed edges must be unique; undirected edges are shared by at most two
    // triangles, with opposite orientation.
    MeshCheck conforming{"conforming", true, {}, ""};
    std::unordered_map<std::uint64_t, std::vector<int>> edge_tris;
    edge_tris.reserve(nt * 2);
    std::map<std::pair<int, int>, int> directed;
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[static_cast<std::size_t>(k)];
            const int b = tri[static_cast<std::size_t>((k + 1) % 3)];
            auto [it, inserted] = directed.emplace(std::make_pair(a, b), static_cast<int>(t));
            if (!inserted) {
                conforming.passed = false;
                conforming.offending.push_back(static_cast<int>(t));
            }
            edge_tris[edge_key(a, b)].push_back(static_cast<int>(t));
        }
    }
    std::vector<char> on_hull(mesh.node_count(), 0);
    for (const auto& [key, tris] : edge_tris) {
        if (tris.size() > 2) {
            conforming.passed = false;
            conforming.offending.insert(conforming.offending.end(), tris.begin(), tris.end());
        } else if (tris.size() == 1) {
            on_hull[static_cast<std::size_t>(key & 0xffffffffu)] = 1;
            on_hull[static_cast<std::size_t>(key >> 32)] = 1;
        }
    }
    // Interior vertices must be surrounded exactly once (no overlapping fans).
    std::vector<double> angle_sum(mesh.node_count(), 0.0);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const Point p = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
            const Point q = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)])];
            const Point r = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 2) % 3)])];
            angle_sum[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])] +=
                std::atan2(cross(q - p, r - p), dot(q - p, r - p));
        }
    }
    for (std::size_t v = 0; v < mesh.node_count(); ++v) {
        if (on_hull[v] || angle_sum[v] == 0.0) continue;
        if (std::abs(angle_sum[v] - 2.0 * M_PI) > 1e-8) {
            conforming.passed = false;
            conforming.offending.push_back(static_cast<int>(v));
        }
    }
    std::sort(conforming.offending.begin(), conforming.offending.end());
    conforming.offending.erase(std::unique(conforming.offending.begin(), conforming.offending.end()),
                               conforming.offending.end());
    if (!conforming.passed) conforming.detail = "overlapping or non-manifold triangles";

    // Cell boundary edges of each cell form one closed, angularly ordered cycle.
    MeshCheck polygons{"cell_polygons", true, {}, ""};
    for (int c = 0; c <= max_cell; ++c) {
        std::vector<int> idx;
        for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e)
            if (mesh.boundary_edges[e].marker.cell == c) idx.push_back(static_cast<int>(e));
        if (idx.empty()) continue;
        std::map<int, std::vector<int>> adj;
        for (int e : idx) {
            const auto& nds = mesh.boundary_edges[static_cast<std::size_t>(e)].nodes;
            adj[nds[0]].push_back(nds[1]);
            adj[nds[1]].push_back(nds[0]);
        }
        bool bad = adj.size() != idx.size();
        for (const auto& [v, nb] : adj) bad = bad || nb.size() != 2;
        if (!bad) {
            Point centroid;
            for (const auto& [v, nb] : adj) centroid = centroid + mesh.nodes[static_cast<std::size_t>(v)];
            centroid = (1.0 / static_cast<double>(adj.size())) * centroid;
            const int start = adj.begin()->first;
            int prev = -1, cur = start;
            double turn = 0.0;
            double last_sign = 0.0;
            std::size_t steps = 0;
            do {
                const auto& nb = adj[cur];
                const int next = nb[0] != prev ? nb[0] : nb[1];
                const Point a = mesh.nodes[static_cast<std::size_t>(cur)] - centroid;
                const Point b = mesh.nodes[static_cast<std::size_t>(next)] - centroid;
                const double dtheta = std::atan2(cross(a, b), dot(a, b));
                if (last_sign != 0.0 && dtheta * last_sign <= 0.0) bad = true;
                last_sign = dtheta > 0 ? 1.0 : -1.0;
                turn += dtheta;
                prev = cur;
                cur = next;
                ++steps;
            } while (cur != start && steps <= idx.size());
            if (steps != idx.size() || std::abs(std::abs(turn) - 2.0 * M_PI) > 1e-9) bad = true;
        }
        if (bad) {
            polygons.passed = false;
            polygons.offending.insert(polygons.offending.end(), idx.begin(), idx.end());
        }
    }
    if (!polygons.passed) polygons.detail = "cell boundary edges do not form an ordered closed polygon";

    MeshCheck adjacency{"boundary_edge_adjacency", true, {}, ""};
    std::unordered_map<std::uint64_t, int> listed;
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        const auto& be = mesh.boundary_edges[e];
        listed[edge_key(be.nodes[0], be.nodes[1])] = static_cast<int>(e);
        auto it = edge_tris.find(edge_key(be.nodes[0], be.nodes[1]));
        bool good = it != edge_tris.end();
        if (good) {
            const auto& tris = it->second;
            if (be.marker.is_outer()) {
                good = tris.size() == 1;
            } else {
                int env = 0;
                for (int t : tris)
                    if (static_cast<std::size_t>(t) < mesh.regions.size() &&
                        mesh.regions[static_cast<std::size_t>(t)].is_environment())
                        ++env;
                good = env == 1;
            }
        }
        if (!good) {
            adjacency.passed = false;
            adjacency.offending.push_back(static_cast<int>(e));
        }
    }
    for (const auto& [key, tris] : edge_tris) {
        if (tris.size() == 1 && !listed.count(key)) {
            adjacency.passed = false;
            adjacency.detail = "unlisted boundary edge; ";
            adjacency.offending.push_back(-1 - tris.front());
        }
    }
    if (!adjacency.passed) adjacency.detail += "boundary edges with wrong triangle adjacency";

    rep.mean_edge_length = mesh.mean_edge_length();
    rep.checks = {positive, conforming, polygons, adjacency};
    return rep;
}

// ---------------------------------------------------------------------------
// Generation

MeshPair generate_mesh_pair(const DomainSpec& domain, double target_h, int segments_per_circle) {
    validate_domain(domain);
    if (!(target_h > 0.0)) throw InvalidInput("target_h must be positive");
    if (segments_per_circle < 16) throw InvalidInput("segments_per_circle must be at least 16");
    if (!domain.cells.empty() && min_clearance(domain) < 3.0 * target_h)
        throw InvalidInput("cell clearance must be at least 3*target_h; refine the mesh");

    const double L = domain.half_width;
    const int n = std::max(2, static_cast<int>(std::lround(2.0 * L / target_h)));
    const double spacing = 2.0 * L / n;

    std::vector<std::vector<Point>> polygons;
    for (const auto& c : domain.cells) {
        std::vector<Point> poly;
        poly.reserve(static_cast<std::size_t>(segments_per_circle));
        for (int k = 0; k < segments_per_circle; ++k) {
            const double th = 2.0 * M_PI * k / segments_per_circle;
            poly.push_back({c.center.x + c.radius * std::cos(th), c.center.y + c.radius * std::sin(th)});
        }
        polygons.push_back(std::move(poly));
    }

    auto too_close = [&](Point p) {
        for (std::size_t i = 0; i < domain.cells.size(); ++i) {
            const CellSpec& c = domain.cells[i];
            const double r = distance(p, c.center);
            if (r < 0.5 * spacing) return true;
            if (std::abs(r - c.radius) > spacing + c.radius) continue;
            const auto& poly = polygons[i];
            for (std::size_t k = 0; k < poly.size(); ++k)
                if (segment_distance(p, poly[k], poly[(k + 1) % poly.size()]) < 0.7 * spacing) return true;
        }
        return false;
    };

    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    std::array<int, 4> corners{};
    for (int j = 0; j <= n; ++j) {
        const double y = j == n ? L : -L + 2.0 * L * j / n;
        for (int i = 0; i <= n; ++i) {
            const double x = i == n ? L : -L + 2.0 * L * i / n;
            const Point p{x, y};
            const bool corner = (i == 0 || i == n) && (j == 0 || j == n);
            if (!corner && too_close(p)) continue;
            if (corner) {
                const int slot = j == 0 ? (i == 0 ? 0 : 1) : (i == n ? 2 : 3);
                corners[static_cast<std::size_t>(slot)] = static_cast<int>(pts.size());
            }
            pts.push_back(p);
        }
    }

    // Cells are inserted in a canonical order so that permuting domain.cells
    // only permutes labels, never the triangulation.
    MeshPair pair;
    const auto ncells = domain.cells.size();
    std::vector<std::size_t> order(ncells);
    for (std::size_t i = 0; i < ncells; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const CellSpec& ca = domain.cells[a];
        const CellSpec& cb = domain.cells[b];
        return std::tie(ca.center.x, ca.center.y, ca.radius) < std::tie(cb.center.x, cb.center.y, cb.radius);
    });
    pair.polygon_nodes.resize(ncells);
    pair.center_nodes.resize(ncells);
    for (std::size_t i : order) {
        for (const auto& p : polygons[i]) {
            pair.polygon_nodes[i].push_back(static_cast<int>(pts.size()));
            pts.push_back(p);
        }
    }
    for (std::size_t i : order) {
        pair.center_nodes[i] = static_cast<int>(pts.size());
        pts.push_back(domain.cells[i].center);
    }

    Mesh& full = pair.full;
    full.triangles = detail::triangulate_rectangle(pts, corners);
    full.nodes = std::move(pts);

    full.regions.resize(full.triangles.size(), Region::environment());
    for (std::size_t t = 0; t < full.triangles.size(); ++t) {
        const auto& tri = full.triangles[t];
        const Point g = (1.0 / 3.0) * (full.nodes[static_cast<std::size_t>(tri[0])] +
                                       full.nodes[static_cast<std::size_t>(tri[1])] +
                                       full.nodes[static_cast<std::size_t>(tri[2])]);
        for (std::size_t i = 0; i < ncells; ++i) {
            if (distance(g, domain.cells[i].center) < domain.cells[i].radius) {
                full.regions[t] = Region::cell_interior(static_cast<int>(i));
                break;
            }
        }
    }

    // Hull edges become the outer boundary; polygon sides must be mesh edges.
    std::unordered_map<std::uint64_t, int> count;
    count.reserve(full.triangles.size() * 2);
    for (const auto& tri : full.triangles)
        for (int k = 0; k < 3; ++k) ++count[edge_key(tri[static_cast<std::size_t>(k)], tri[static_cast<std::size_t>((k + 1) % 3)])];
    for (const auto& tri : full.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = tri[static_cast<std::size_t>(k)];
            const int b = tri[static_cast<std::size_t>((k + 1) % 3)];
            if (count[edge_key(a, b)] == 1) full.boundary_edges.push_back({{a, b}, BoundaryMarker::outer()});
        }
    }
    for (std::size_t i : order) {
        const auto& poly = pair.polygon_nodes[i];
        for (std::size_t k = 0; k < poly.size(); ++k) {
            const int a = poly[k];
            const int b = poly[(k + 1) % poly.size()];
            if (count.find(edge_key(a, b)) == count.end()) {
                std::ostringstream os;
                os << "cell " << i << ": polygon side " << k << " is not a mesh edge";
                throw GenerationError(os.str());
            }
            full.boundary_edges.push_back({{a, b}, BoundaryMarker::cell_boundary(static_cast<int>(i))});
        }
    }
    full.assign_new_id();

    Mesh& excl = pair.exclusion;
    std::vector<int> inverse(full.node_count(), -1);
    std::vector<char> used(full.node_count(), 0);
    for (std::size_t t = 0; t < full.triangles.size(); ++t)
        if (full.regions[t].is_environment())
            for (int v : full.triangles[t]) used[static_cast<std::size_t>(v)] = 1;
    for (std::size_t v = 0; v < full.node_count(); ++v) {
        if (!used[v]) continue;
        inverse[v] = static_cast<int>(pair.node_map.size());
        pair.node_map.push_back(static_cast<int>(v));
        excl.nodes.push_back(full.nodes[v]);
    }
    for (std::size_t t = 0; t < full.triangles.size(); ++t) {
        if (!full.regions[t].is_environment()) continue;
        const auto& tri = full.triangles[t];
        excl.triangles.push_back({inverse[static_cast<std::size_t>(tri[0])], inverse[static_cast<std::size_t>(tri[1])],
                                  inverse[static_cast<std::size_t>(tri[2])]});
        excl.regions.push_back(Region::environment());
    }
    for (const auto& e : full.boundary_edges)
        excl.boundary_edges.push_back(
            {{inverse[static_cast<std::size_t>(e.nodes[0])], inverse[static_cast<std::size_t>(e.nodes[1])]}, e.marker});
    excl.assign_new_id();

    for (const Mesh* m : {&pair.full, &pair.exclusion}) {
        const MeshReport rep = validate_mesh(*m);
        if (!rep.ok()) {
            std::ostringstream os;
            os << "generated " << (m == &pair.full ? "full" : "exclusion") << " mesh failed validation:";
            for (const auto& c : rep.checks)
                if (!c.passed) os << ' ' << c.name << " (" << c.offending.size() << " offending) " << c.detail;
            throw GenerationError(os.str());
        }
    }
    return pair;
}

// ---------------------------------------------------------------------------
// Text I/O

void write_mesh(std::ostream& os, const Mesh& mesh) {
    os << "nodes " << mesh.node_count() << " triangles " << mesh.triangle_count() << " edges "
       << mesh.boundary_edges.size() << '\n';
    os << std::setprecision(17);
    for (const auto& p : mesh.nodes) os << p.x << ' ' << p.y << '\n';
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const int tag = t < mesh.regions.size() ? mesh.regions[t].cell + 1 : 0;
        os << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << tag << '\n';
    }
    for (const auto& e : mesh.boundary_edges)
        os << e.nodes[0] << ' ' << e.nodes[1] << ' ' << e.marker.cell + 1 << '\n';
}

Mesh read_mesh(std::istream& is) {
    std::string w1, w2, w3;
    std::size_t nn = 0, nt = 0, ne = 0;
    if (!(is >> w1 >> nn >> w2 >> nt >> w3 >> ne) || w1 != "nodes" || w2 != "triangles" || w3 != "edges")
        throw InvalidInput("mesh file: bad header");
    Mesh m;
    m.nodes.resize(nn);
    for (auto& p : m.nodes)
        if (!(is >> p.x >> p.y)) throw InvalidInput("mesh file: truncated node block");
    m.triangles.resize(nt);
    m.regions.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        int tag = 0;
        auto& tri = m.triangles[t];
        if (!(is >> tri[0] >> tri[1] >> tri[2] >> tag)) throw InvalidInput("mesh file: truncated triangle block");
        m.regions[t] = Region{tag - 1};
    }
    m.boundary_edges.resize(ne);
    for (auto& e : m.boundary_edges) {
        int marker = 0;
        if (!(is >> e.nodes[0] >> e.nodes[1] >> marker)) throw InvalidInput("mesh file: truncated edge block");
        e.marker = BoundaryMarker{marker - 1};
    }
    for (const auto& tri : m.triangles)
        for (int v : tri)
            if (v < 0 || static_cast<std::size_t>(v) >= nn) throw InvalidInput("mesh file: node index out of range");
    m.assign_new_id();
    return m;
}

void write_field(std::ostream& os, const std::vector<double>& values) {
    os << "field " << values.size() << '\n' << std::setprecision(17);
    for (double v : values) os << v << '\n';
}

std::vector<double> read_field(std::istream& is) {
    std::string word;
    std::size_t n = 0;
    if (!(is >> word >> n) || word != "field") throw InvalidInput("field file: bad header");
    std::vector<double> v(n);
    for (auto& x : v)
        if (!(is >> x)) throw InvalidInput("field file: truncated");
    return v;
}

}  // namespace pslab
