#pragma once

#include <cstddef>
#include <vector>

namespace pslab {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Square matrix in compressed row storage. Column indices are strictly
/// increasing within each row.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Sums duplicate entries. Summation order follows the input order, so the
    /// result is deterministic for a deterministic triplet list.
    static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> entries, bool symmetric);

    std::size_t dimension() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }
    bool symmetric() const { return symmetric_; }

    const std::vector<std::size_t>& row_offsets() const { return offsets_; }
    const std::vector<int>& columns() const { return columns_; }
    const std::vector<double>& values() const { return values_; }

    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    std::vector<double> diagonal() const;

    /// y = A x
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> operator*(const std::vector<double>& x) const;

    /// x^T A x
    double quadratic_form(const std::vector<double>& x) const;

    /// a*A + b*B over the union of both sparsity patterns.
    static SparseMatrix combine(double a, const SparseMatrix& A, double b, const SparseMatrix& B);

    /// max |A_ij - A_ji| / max |A_ij|
    double asymmetry() const;

private:
    std::size_t n_ = 0;
    bool symmetric_ = false;
    std::vector<std::size_t> offsets_{0};
    std::vector<int> columns_;
    std::vector<double> values_;
};

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for SPD A. `x` holds the initial
/// guess on entry and the solution on exit. Converged when
/// ||b - A x|| <= tol * ||b||.
CgResult conjugate_gradient(const SparseMatrix& A, const std::vector<double>& inv_diag,
                            const std::vector<double>& b, std::vector<double>& x, double tol,
                            int max_iterations);

}  // namespace pslab
