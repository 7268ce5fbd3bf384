#include "pslab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pslab/errors.hpp"

namespace pslab {

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::vector<Triplet> entries, bool symmetric) {
    for (const auto& e : entries)
        if (e.row < 0 || e.col < 0 || static_cast<std::size_t>(e.row) >= n || static_cast<std::size_t>(e.col) >= n)
            throw InvalidInput("triplet index out of range");

    // Counting sort by row keeps insertion order inside each row.
    std::vector<std::size_t> count(n + 1, 0);
    for (const auto& e : entries) ++count[static_cast<std::size_t>(e.row) + 1];
    for (std::size_t i = 0; i < n; ++i) count[i + 1] += count[i];
    std::vector<Triplet> by_row(entries.size());
    std::vector<std::size_t> fill(count.begin(), count.end() - 1);
    for (const auto& e : entries) by_row[fill[static_cast<std::size_t>(e.row)]++] = e;

    SparseMatrix m;
    m.n_ = n;
    m.symmetric_ = symmetric;
    m.offsets_.assign(n + 1, 0);
    m.columns_.reserve(entries.size() / 3 + n);
    m.values_.reserve(entries.size() / 3 + n);
    for (std::size_t i = 0; i < n; ++i) {
        auto first = by_row.begin() + static_cast<std::ptrdiff_t>(count[i]);
        auto last = by_row.begin() + static_cast<std::ptrdiff_t>(count[i + 1]);
        std::stable_sort(first, last, [](const Triplet& a, const Triplet& b) { return a.col < b.col; });
        for (auto it = first; it != last; ++it) {
            if (!m.columns_.empty() && m.offsets_[i] < m.columns_.size() && m.columns_.back() == it->col)
                m.values_.back() += it->value;
            else {
                m.columns_.push_back(it->col);
                m.values_.push_back(it->value);
            }
        }
        m.offsets_[i + 1] = m.columns_.size();
    }
    return m;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<int>(j));
    if (it == last || *it != static_cast<int>(j)) return 0.0;
    return values_[static_cast<std::size_t>(it - columns_.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
            s += values_[k] * x[static_cast<std::size_t>(columns_[k])];
        y[i] = s;
    }
}

std::vector<double> SparseMatrix::operator*(const std::vector<double>& x) const {
    std::vector<double> y;
    multiply(x, y);
    return y;
}

double SparseMatrix::quadratic_form(const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double r = 0.0;
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
            r += values_[k] * x[static_cast<std::size_t>(columns_[k])];
        s += x[i] * r;
    }
    return s;
}

SparseMatrix SparseMatrix::combine(double a, const SparseMatrix& A, double b, const SparseMatrix& B) {
    if (A.n_ != B.n_) throw InvalidInput("matrix dimensions differ");
    SparseMatrix m;
    m.n_ = A.n_;
    m.symmetric_ = A.symmetric_ && B.symmetric_;
    m.offsets_.assign(m.n_ + 1, 0);
    for (std::size_t i = 0; i < m.n_; ++i) {
        std::size_t p = A.offsets_[i], q = B.offsets_[i];
        const std::size_t pe = A.offsets_[i + 1], qe = B.offsets_[i + 1];
        while (p < pe || q < qe) {
            if (q >= qe || (p < pe && A.columns_[p] < B.columns_[q])) {
                m.columns_.push_back(A.columns_[p]);
                m.values_.push_back(a * A.values_[p++]);
            } else if (p >= pe || B.columns_[q] < A.columns_[p]) {
                m.columns_.push_back(B.columns_[q]);
                m.values_.push_back(b * B.values_[q++]);
            } else {
                m.columns_.push_back(A.columns_[p]);
                m.values_.push_back(a * A.values_[p++] + b * B.values_[q++]);
            }
        }
        m.offsets_[i + 1] = m.columns_.size();
    }
    return m;
}

double SparseMatrix::asymmetry() const {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            const auto j = static_cast<std::size_t>(columns_[k]);
            scale = std::max(scale, std::abs(values_[k]));
            worst = std::max(worst, std::abs(values_[k] - at(j, i)));
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

namespace {
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
}  // namespace

CgResult conjugate_gradient(const SparseMatrix& A, const std::vector<double>& inv_diag,
                            const std::vector<double>& b, std::vector<double>& x, double tol,
                            int max_iterations) {
    const std::size_t n = A.dimension();
    CgResult res;
    x.resize(n, 0.0);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.multiply(x, Ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    double rnorm = std::sqrt(dot(r, r));
    res.relative_residual = rnorm / bnorm;
    if (res.relative_residual <= tol) {
        res.converged = true;
        return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iterations; ++it) {
        A.multiply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) break;  // not SPD, or breakdown
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        rnorm = std::sqrt(dot(r, r));
        res.iterations = it;
        res.relative_residual = rnorm / bnorm;
        if (res.relative_residual <= tol) {
            res.converged = true;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return res;
}

}  // namespace pslab
