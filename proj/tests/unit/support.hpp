#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "pslab/mesh.hpp"

namespace pslab::test {

// Unit square split along the (0,0)-(1,1) diagonal.
inline Mesh unit_square() {
    Mesh m;
    m.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    m.regions = {Region::environment(), Region::environment()};
    m.boundary_edges = {{{0, 1}, BoundaryMarker::outer()},
                        {{1, 2}, BoundaryMarker::outer()},
                        {{2, 3}, BoundaryMarker::outer()},
                        {{3, 0}, BoundaryMarker::outer()}};
    m.assign_new_id();
    return m;
}

inline DomainSpec single_cell() {
    DomainSpec d;
    d.cells = {{{-3.5, -4.0}, 0.5, 1.0}};
    return d;
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(A[i][k]) > std::fabs(A[p][k])) p = i;
        std::swap(A[k], A[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = A[i][k] / A[k][k];
            for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= A[k][j] * x[j];
        x[k] = s / A[k][k];
    }
    return x;
}

// Adaptive Simpson quadrature.
template <class F>
double simpson(F f, double a, double b, double tol, int depth = 40) {
    const auto rule = [&](double lo, double hi, double flo, double fmid, double fhi) {
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    };
    struct Rec {
        F& f;
        decltype(rule)& r;
        double go(double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = r(lo, mid, flo, flm, fmid), right = r(mid, hi, fmid, frm, fhi);
            if (d <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
                return left + right + (left + right - whole) / 15.0;
            return go(lo, mid, flo, flm, fmid, left, eps / 2, d - 1) + go(mid, hi, fmid, frm, fhi, right, eps / 2, d - 1);
        }
    } rec{f, rule};
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec.go(a, b, fa, fm, fb, rule(a, b, fa, fm, fb), tol, depth);
}

}  // namespace pslab::test
