#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace omc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Malformed input data: bad files, out-of-scale ratings, invalid indices.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a usable result (non-finite values,
/// failed factorization).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One observed entry of a partially observed matrix.
struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Observed entries of an m x n matrix, stored in sorted row-major
/// coordinate order. Immutable after construction; duplicate coordinates
/// are rejected. A column-sorted entry permutation is kept alongside so
/// that both A*B and A^T*B kernels can partition work without races.
class SparseMatrix {
public:
    SparseMatrix(Index n_rows, Index n_cols, std::vector<Triplet> entries);

    Index n_rows() const { return n_rows_; }
    Index n_cols() const { return n_cols_; }
    Index nnz() const { return static_cast<Index>(values_.size()); }

    std::span<const Index> rows() const { return rows_; }
    std::span<const Index> cols() const { return cols_; }
    std::span<const double> values() const { return values_; }

    /// Offsets into the entry arrays per row; size n_rows + 1.
    std::span<const Index> row_ptr() const { return row_ptr_; }
    /// Offsets into col_order() per column; size n_cols + 1.
    std::span<const Index> col_ptr() const { return col_ptr_; }
    /// Entry indices sorted by (col, row).
    std::span<const Index> col_order() const { return col_order_; }

    double squared_norm() const;

private:
    Index n_rows_;
    Index n_cols_;
    std::vector<Index> rows_;
    std::vector<Index> cols_;
    std::vector<double> values_;
    std::vector<Index> row_ptr_;
    std::vector<Index> col_ptr_;
    std::vector<Index> col_order_;
};

/// Rank-k factors (P, sigma, Q) of an m x n matrix P * diag(sigma) * Q^T.
/// P and Q carry orthonormal columns, sigma is nonnegative and sorted
/// nonincreasing. Rank 0 (empty factor blocks) represents the zero matrix.
class PartialSVD {
public:
    PartialSVD(Matrix p, Vector sigma, Matrix q);

    /// The zero matrix of the given shape.
    static PartialSVD zero(Index n_rows, Index n_cols);

    Index n_rows() const { return p_.rows(); }
    Index n_cols() const { return q_.rows(); }
    Index rank() const { return sigma_.size(); }

    const Matrix& p() const { return p_; }
    const Vector& sigma() const { return sigma_; }
    const Matrix& q() const { return q_; }

    /// ||P Sigma Q^T||_F^2 = sum sigma_i^2.
    double squared_norm() const { return sigma_.squaredNorm(); }
    double nuclear_norm() const { return sigma_.sum(); }

    /// Leading-k truncation (no-op when rank <= k).
    PartialSVD truncated(Index k) const;

    /// max(||P^T P - I||_F, ||Q^T Q - I||_F); the orthonormality invariant
    /// requires this <= 1e-10 * rank.
    double orthonormality_defect() const;
    bool is_orthonormal() const;

private:
    Matrix p_;
    Vector sigma_;
    Matrix q_;
};

/// Implicit matrix Y = S + P Sigma Q^T. Supports matrix-vector and
/// matrix-block products without ever forming the dense matrix.
struct SparsePlusLowRank {
    SparseMatrix sparse;
    PartialSVD lowrank;

    SparsePlusLowRank(SparseMatrix s, PartialSVD z);

    Index n_rows() const { return sparse.n_rows(); }
    Index n_cols() const { return sparse.n_cols(); }
};

/// Extend factors with zero rows so the reconstruction is unchanged on the
/// original block and zero elsewhere. Shrinking dimensions is rejected.
PartialSVD pad(const PartialSVD& z, Index new_rows, Index new_cols);

/// Every entry of a dense matrix as an observed triplet, zeros included
/// (a fully observed pattern, not a compression).
SparseMatrix sparse_from_dense(const Matrix& a);

}  // namespace omc
