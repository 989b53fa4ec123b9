#include "omc/types.hpp"

#include <algorithm>
#include <cmath>

namespace omc {

SparseMatrix::SparseMatrix(Index n_rows, Index n_cols, std::vector<Triplet> entries)
    : n_rows_(n_rows), n_cols_(n_cols) {
    if (n_rows < 0 || n_cols < 0)
        throw std::invalid_argument("SparseMatrix: negative dimensions");

    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    const auto n = static_cast<Index>(entries.size());
    rows_.resize(n);
    cols_.resize(n);
    values_.resize(n);
    for (Index i = 0; i < n; ++i) {
        const Triplet& t = entries[i];
        if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
            throw std::invalid_argument("SparseMatrix: entry index out of range");
        if (i > 0 && t.row == rows_[i - 1] && t.col == cols_[i - 1])
            throw std::invalid_argument("SparseMatrix: duplicate entry at (" +
                                        std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
        rows_[i] = t.row;
        cols_[i] = t.col;
        values_[i] = t.value;
    }

    row_ptr_.assign(n_rows + 1, 0);
    for (Index i = 0; i < n; ++i) ++row_ptr_[rows_[i] + 1];
    for (Index r = 0; r < n_rows; ++r) row_ptr_[r + 1] += row_ptr_[r];

    col_ptr_.assign(n_cols + 1, 0);
    for (Index i = 0; i < n; ++i) ++col_ptr_[cols_[i] + 1];
    for (Index c = 0; c < n_cols; ++c) col_ptr_[c + 1] += col_ptr_[c];

    // Entries are row-major sorted, so a stable counting pass per column
    // yields (col, row)-sorted order.
    col_order_.resize(n);
    std::vector<Index> next(col_ptr_.begin(), col_ptr_.end() - 1);
    for (Index i = 0; i < n; ++i) col_order_[next[cols_[i]]++] = i;
}

double SparseMatrix::squared_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
}

PartialSVD::PartialSVD(Matrix p, Vector sigma, Matrix q)
    : p_(std::move(p)), sigma_(std::move(sigma)), q_(std::move(q)) {
    if (p_.cols() != sigma_.size() || q_.cols() != sigma_.size())
        throw std::invalid_argument("PartialSVD: factor ranks disagree");
    for (Index i = 0; i < sigma_.size(); ++i) {
        if (!(sigma_[i] >= 0.0))
            throw std::invalid_argument("PartialSVD: negative or NaN singular value");
        if (i > 0 && sigma_[i] > sigma_[i - 1])
            throw std::invalid_argument("PartialSVD: singular values not nonincreasing");
    }
}

PartialSVD PartialSVD::zero(Index n_rows, Index n_cols) {
    return PartialSVD(Matrix(n_rows, 0), Vector(0), Matrix(n_cols, 0));
}

PartialSVD PartialSVD::truncated(Index k) const {
    if (k < 0) throw std::invalid_argument("PartialSVD::truncated: negative rank");
    if (k >= rank()) return *this;
    return PartialSVD(p_.leftCols(k), sigma_.head(k), q_.leftCols(k));
}

double PartialSVD::orthonormality_defect() const {
    const Index k = rank();
    if (k == 0) return 0.0;
    const Matrix eye = Matrix::Identity(k, k);
    const double dp = (p_.transpose() * p_ - eye).norm();
    const double dq = (q_.transpose() * q_ - eye).norm();
    return std::max(dp, dq);
}

bool PartialSVD::is_orthonormal() const {
    return orthonormality_defect() <= 1e-10 * std::max<Index>(rank(), 1);
}

SparsePlusLowRank::SparsePlusLowRank(SparseMatrix s, PartialSVD z)
    : sparse(std::move(s)), lowrank(std::move(z)) {
    if (sparse.n_rows() != lowrank.n_rows() || sparse.n_cols() != lowrank.n_cols())
        throw std::invalid_argument("SparsePlusLowRank: parts have different shapes");
}

PartialSVD pad(const PartialSVD& z, Index new_rows, Index new_cols) {
    if (new_rows < z.n_rows() || new_cols < z.n_cols())
        throw std::invalid_argument("pad: shrinking dimensions rejected");
    if (new_rows == z.n_rows() && new_cols == z.n_cols()) return z;
    Matrix p = Matrix::Zero(new_rows, z.rank());
    Matrix q = Matrix::Zero(new_cols, z.rank());
    p.topRows(z.n_rows()) = z.p();
    q.topRows(z.n_cols()) = z.q();
    return PartialSVD(std::move(p), z.sigma(), std::move(q));
}

SparseMatrix sparse_from_dense(const Matrix& a) {
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(a.size()));
    for (Index r = 0; r < a.rows(); ++r)
        for (Index c = 0; c < a.cols(); ++c) entries.push_back({r, c, a(r, c)});
    return SparseMatrix(a.rows(), a.cols(), std::move(entries));
}

}  // namespace omc
