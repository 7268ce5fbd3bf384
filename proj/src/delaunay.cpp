#include "delaunay.hpp"

#include <sstream>

#include "predicates.hpp"
#include "pslab/errors.hpp"

namespace pslab::detail {
namespace {

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // nb[i] is across the edge opposite v[i]
    bool alive = true;
};

class Triangulator {
public:
    explicit Triangulator(const std::vector<Point>& pts)
        : pts_(pts), by_first_(pts.size(), -1), by_second_(pts.size(), -1), mark_() {}

    void seed(const std::array<int, 4>& c) {
        // (c0, c1, c2) and (c0, c2, c3); they share edge c0-c2.
        tris_.push_back({{c[0], c[1], c[2]}, {-1, 1, -1}, true});
        tris_.push_back({{c[0], c[2], c[3]}, {-1, -1, 0}, true});
        mark_.assign(2, 0);
        last_ = 0;
    }

    void insert(int p) {
        const int start = locate(p);
        collect_cavity(start, p);
        retriangulate(p);
    }

    std::vector<std::array<int, 3>> result() const {
        std::vector<std::array<int, 3>> out;
        out.reserve(tris_.size() / 2);
        for (const auto& t : tris_)
            if (t.alive) out.push_back(t.v);
        return out;
    }

private:
    Point at(int i) const { return pts_[static_cast<std::size_t>(i)]; }

    [[noreturn]] void fail(const std::string& msg, int p) const {
        std::ostringstream os;
        os.precision(17);
        os << "triangulation degeneracy at point " << p << " (" << at(p).x << ", " << at(p).y
           << "): " << msg;
        throw GenerationError(os.str());
    }

    // Visibility walk from the most recently created triangle.
    int locate(int p) {
        int t = last_;
        const Point q = at(p);
        for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
            const Tri& tr = tris_[static_cast<std::size_t>(t)];
            int next = -1;
            for (int i = 0; i < 3; ++i) {
                const int a = tr.v[(i + 1) % 3];
                const int b = tr.v[(i + 2) % 3];
                if (orient2d(at(a), at(b), q) < 0) {
                    next = tr.nb[i];
                    if (next < 0) fail("point outside the triangulated rectangle", p);
                    break;
                }
            }
            if (next < 0) {
                for (int i = 0; i < 3; ++i)
                    if (at(tr.v[i]) == q) fail("duplicate point", p);
                return t;
            }
            t = next;
        }
        fail("point location did not terminate", p);
    }

    void collect_cavity(int start, int p) {
        ++stamp_;
        cavity_.clear();
        stack_.clear();
        stack_.push_back(start);
        mark_[static_cast<std::size_t>(start)] = stamp_;
        const Point q = at(p);
        while (!stack_.empty()) {
            const int t = stack_.back();
            stack_.pop_back();
            cavity_.push_back(t);
            for (int nb : tris_[static_cast<std::size_t>(t)].nb) {
                if (nb < 0 || mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
                const auto& v = tris_[static_cast<std::size_t>(nb)].v;
                if (incircle(at(v[0]), at(v[1]), at(v[2]), q) > 0) {
                    mark_[static_cast<std::size_t>(nb)] = stamp_;
                    stack_.push_back(nb);
                }
            }
        }
    }

    void retriangulate(int p) {
        const Point q = at(p);
        const std::size_t first_new = tris_.size();
        touched_.clear();
        for (int t : cavity_) {
            const Tri old = tris_[static_cast<std::size_t>(t)];
            for (int i = 0; i < 3; ++i) {
                const int nb = old.nb[i];
                if (nb >= 0 && mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
                const int a = old.v[(i + 1) % 3];
                const int b = old.v[(i + 2) % 3];
                const int o = orient2d(at(a), at(b), q);
                if (o == 0) {
                    // p splits a hull edge; the fan stays open there.
                    if (nb >= 0) fail("point on an interior cavity edge", p);
                    continue;
                }
                if (o < 0) fail("cavity is not star-shaped", p);
                const int id = static_cast<int>(tris_.size());
                tris_.push_back({{a, b, p}, {-1, -1, nb}, true});
                mark_.push_back(0);
                if (nb >= 0) {
                    auto& n = tris_[static_cast<std::size_t>(nb)];
                    for (int k = 0; k < 3; ++k)
                        if (n.nb[k] == t) n.nb[k] = id;
                }
                by_first_[static_cast<std::size_t>(a)] = id;
                by_second_[static_cast<std::size_t>(b)] = id;
                touched_.push_back(a);
                touched_.push_back(b);
                last_ = id;
            }
            tris_[static_cast<std::size_t>(t)].alive = false;
        }
        // Link fan neighbors: (a, b, p) borders (b, c, p) across b-p and (z, a, p) across p-a.
        for (std::size_t k = first_new; k < tris_.size(); ++k) {
            Tri& tr = tris_[k];
            const int a = tr.v[0];
            const int b = tr.v[1];
            tr.nb[0] = by_first_[static_cast<std::size_t>(b)];
            tr.nb[1] = by_second_[static_cast<std::size_t>(a)];
        }
        for (int v : touched_) {
            by_first_[static_cast<std::size_t>(v)] = -1;
            by_second_[static_cast<std::size_t>(v)] = -1;
        }
    }

    const std::vector<Point>& pts_;
    std::vector<Tri> tris_;
    std::vector<int> by_first_;
    std::vector<int> by_second_;
    std::vector<unsigned> mark_;
    std::vector<int> cavity_;
    std::vector<int> stack_;
    std::vector<int> touched_;
    unsigned stamp_ = 0;
    int last_ = 0;
};

}  // namespace

std::vector<std::array<int, 3>> triangulate_rectangle(const std::vector<Point>& points,
                                                      const std::array<int, 4>& corners) {
    Triangulator tr(points);
    tr.seed(corners);
    std::vector<char> is_corner(points.size(), 0);
    for (int c : corners) is_corner[static_cast<std::size_t>(c)] = 1;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!is_corner[i]) tr.insert(static_cast<int>(i));
    return tr.result();
}

}  // namespace pslab::detail
