#include "pslab/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "pslab/errors.hpp"

namespace pslab {

ObjectiveSpec ObjectiveSpec::option(int id) {
    if (id < 1 || id > 6) throw InvalidInput("option id must be in 1..6");
    ObjectiveSpec s;
    s.kind = id <= 2 ? ObjectiveKind::L1 : id <= 4 ? ObjectiveKind::MaxMin : ObjectiveKind::Combined;
    s.constraint = id % 2 == 0 ? ConstraintKind::FluxAtZero : ConstraintKind::None;
    return s;
}

ObjectiveSpec ObjectiveSpec::continuity(double C) {
    if (!(C > 0.0)) throw InvalidInput("continuity constraint needs C > 0");
    ObjectiveSpec s;
    s.constraint = ConstraintKind::Continuity;
    s.background = C;
    return s;
}

void ObjectiveSpec::validate() const {
    if (!(horizon > 0.0)) throw InvalidInput("objective horizon must be positive");
    if (quadrature_points < 100) throw InvalidInput("objective needs at least 100 quadrature points");
    if (constraint == ConstraintKind::Continuity && !(background > 0.0))
        throw InvalidInput("continuity constraint needs C > 0");
}

std::string ObjectiveSpec::describe() const {
    std::ostringstream os;
    os << (kind == ObjectiveKind::L1 ? "L1" : kind == ObjectiveKind::MaxMin ? "MaxMin" : "Combined");
    if (constraint == ConstraintKind::FluxAtZero) os << "+flux_at_zero";
    if (constraint == ConstraintKind::Continuity) os << "+continuity(C=" << background << ")";
    os << " T=" << horizon << " n=" << quadrature_points;
    return os.str();
}

double objective_value(const ObjectiveSpec& spec, double p0, double t0, const FluxParams& fp) {
    if (!std::isfinite(p0) || !std::isfinite(t0) || t0 < kMinT0 || t0 > kMaxT0 || p0 < 0.0 || p0 > kMaxP0)
        return std::numeric_limits<double>::infinity();
    const GaussianICParams ic{p0, t0, 0.0};
    const int n = spec.quadrature_points;
    const double h = spec.horizon / (n - 1);
    double l1 = 0.0, mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const double d = phi_sum(k * h, fp, ic) - fp.phi;
        const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
        l1 += w * std::abs(d);
        mx = std::max(mx, d);
        mn = std::min(mn, d);
    }
    l1 *= h;
    const double maxmin = std::abs(mx) + std::abs(mn);
    switch (spec.kind) {
        case ObjectiveKind::L1: return l1;
        case ObjectiveKind::MaxMin: return maxmin;
        case ObjectiveKind::Combined: return l1 + maxmin;
    }
    return l1;
}

double constrained_p0(const ObjectiveSpec& spec, double t0, const FluxParams& fp) {
    switch (spec.constraint) {
        case ConstraintKind::FluxAtZero: return p0_from_t0(t0, fp);
        case ConstraintKind::Continuity: return p0_from_continuity(t0, spec.background, fp);
        case ConstraintKind::None: break;
    }
    throw InvalidInput("constrained_p0 called for an unconstrained spec");
}

namespace {

using Vec2 = std::array<double, 2>;  // (p0, t0)

struct NmOutcome {
    Vec2 x;
    double f;
    int iterations;
    bool converged;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
template <class F>
NmOutcome nelder_mead(F f, Vec2 x0, int max_iter) {
    std::array<Vec2, 3> s{x0, x0, x0};
    s[1][0] = x0[0] != 0.0 ? 1.05 * x0[0] : 2.5e-4;
    s[2][1] = x0[1] != 0.0 ? 1.05 * x0[1] : 2.5e-4;
    std::array<double, 3> fs{f(s[0]), f(s[1]), f(s[2])};
    int it = 0;
    auto order = [&] {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        std::array<Vec2, 3> s2{s[idx[0]], s[idx[1]], s[idx[2]]};
        std::array<double, 3> f2{fs[idx[0]], fs[idx[1]], fs[idx[2]]};
        s = s2;
        fs = f2;
    };
    bool converged = false;
    for (; it < max_iter; ++it) {
        order();
        double xspread = 0.0;
        for (int k = 1; k < 3; ++k)
            for (int d = 0; d < 2; ++d)
                xspread = std::max(xspread, std::abs(s[k][d] - s[0][d]) / std::max(1.0, std::abs(s[0][d])));
        const double fspread = std::max(std::abs(fs[1] - fs[0]), std::abs(fs[2] - fs[0]));
        if (xspread < 1e-10 && fspread < 1e-13) {
            converged = true;
            break;
        }
        const Vec2 c{0.5 * (s[0][0] + s[1][0]), 0.5 * (s[0][1] + s[1][1])};
        auto along = [&](double t) { return Vec2{c[0] + t * (s[2][0] - c[0]), c[1] + t * (s[2][1] - c[1])}; };
        const Vec2 xr = along(-1.0);
        const double fr = f(xr);
        if (fr < fs[0]) {
            const Vec2 xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s[2] = xe;
                fs[2] = fe;
            } else {
                s[2] = xr;
                fs[2] = fr;
            }
        } else if (fr < fs[1]) {
            s[2] = xr;
            fs[2] = fr;
        } else {
            const bool outside = fr < fs[2];
            const Vec2 xc = along(outside ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < (outside ? fr : fs[2])) {
                s[2] = xc;
                fs[2] = fc;
            } else {
                for (int k = 1; k < 3; ++k) {
                    s[k] = {s[0][0] + 0.5 * (s[k][0] - s[0][0]), s[0][1] + 0.5 * (s[k][1] - s[0][1])};
                    fs[k] = f(s[k]);
                }
            }
        }
    }
    order();
    return {s[0], fs[0], it, converged};
}

bool better(double f, double t0, double best_f, double best_t0) {
    return f < best_f || (f == best_f && t0 < best_t0);
}

OptimResult optimize_unconstrained(const ObjectiveSpec& spec, const FluxParams& fp,
                                   std::optional<std::pair<double, double>> start) {
    auto f = [&](const Vec2& x) { return objective_value(spec, x[0], x[1], fp); };
    std::vector<Vec2> starts;
    if (start) {
        starts.push_back({start->first, start->second});
    } else {
        for (double t0 : {0.5, 1.0, 2.0, 4.0, 8.0}) starts.push_back({p0_from_t0(t0, fp), t0});
    }
    OptimResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::ostringstream diag;
    for (const Vec2& x0 : starts) {
        NmOutcome cur = nelder_mead(f, x0, 20000);
        int iters = cur.iterations;
        // Restart from the incumbent: a fresh simplex escapes premature collapse
        // on the kinks of the L1 and max-min objectives.
        for (int r = 0; r < 20; ++r) {
            NmOutcome next = nelder_mead(f, cur.x, 20000);
            iters += next.iterations;
            const bool improved = next.f < cur.f - 1e-14;
            if (next.f <= cur.f) cur = next;
            if (!improved) break;
        }
        diag << "start(p0=" << x0[0] << ",t0=" << x0[1] << ")->" << cur.f << "; ";
        best.iterations += iters;
        if (better(cur.f, cur.x[1], best.objective, best.t0)) {
            best.p0 = cur.x[0];
            best.t0 = cur.x[1];
            best.objective = cur.f;
            best.converged = cur.converged && std::isfinite(cur.f);
        }
    }
    best.diagnostics = diag.str();
    if (!best.converged) best.diagnostics += "simplex did not collapse within the iteration cap";
    return best;
}

OptimResult optimize_constrained(const ObjectiveSpec& spec, const FluxParams& fp) {
    auto g = [&](double t0) {
        double p0;
        try {
            p0 = constrained_p0(spec, t0, fp);
        } catch (const InvalidInput&) {
            return std::numeric_limits<double>::infinity();
        }
        return objective_value(spec, p0, t0, fp);
    };
    constexpr int kScan = 2000;
    const double lmin = std::log(kMinT0), lmax = std::log(kMaxT0);
    std::vector<double> ts(kScan + 1), vs(kScan + 1);
    int imin = -1;
    for (int k = 0; k <= kScan; ++k) {
        ts[static_cast<std::size_t>(k)] = std::exp(lmin + (lmax - lmin) * k / kScan);
        vs[static_cast<std::size_t>(k)] = g(ts[static_cast<std::size_t>(k)]);
        if (std::isfinite(vs[static_cast<std::size_t>(k)]) &&
            (imin < 0 || vs[static_cast<std::size_t>(k)] < vs[static_cast<std::size_t>(imin)]))
            imin = k;
    }
    OptimResult res;
    res.iterations = kScan + 1;
    if (imin < 0) {
        res.converged = false;
        res.diagnostics = "no finite objective value on the t0 scan";
        res.objective = std::numeric_limits<double>::infinity();
        return res;
    }
    const bool interior = imin > 0 && imin < kScan;
    double a = ts[static_cast<std::size_t>(std::max(imin - 1, 0))];
    double b = ts[static_cast<std::size_t>(std::min(imin + 1, kScan))];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = g(c), fd = g(d);
    while (b - a > 1e-10) {
        ++res.iterations;
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = g(d);
        }
        if (res.iterations > kScan + 500) break;
    }
    double t0 = 0.5 * (a + b);
    double f0 = g(t0);
    // Keep the scan point if refinement landed on a worse value (flat or kinked basin).
    if (!(f0 <= vs[static_cast<std::size_t>(imin)])) {
        t0 = ts[static_cast<std::size_t>(imin)];
        f0 = vs[static_cast<std::size_t>(imin)];
    }
    res.t0 = t0;
    res.p0 = constrained_p0(spec, t0, fp);
    res.objective = f0;
    res.converged = interior && std::isfinite(f0);
    if (!interior) res.diagnostics = "minimum lies on the edge of the t0 search range";
    return res;
}

}  // namespace

OptimResult optimize(const ObjectiveSpec& spec, const FluxParams& fp, std::optional<std::pair<double, double>> start) {
    spec.validate();
    fp.validate();
    if (spec.constraint == ConstraintKind::None) return optimize_unconstrained(spec, fp, start);
    return optimize_constrained(spec, fp);
}

}  // namespace pslab
