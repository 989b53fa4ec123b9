#include "omc/kernels.hpp"

#include <atomic>

namespace omc::kernels {

namespace {

std::atomic<std::uint64_t> g_sparse_scans{0};

void check_multiply_dims(const SparsePlusLowRank& a, const Matrix& block, bool transposed) {
    const Index need = transposed ? a.n_rows() : a.n_cols();
    if (block.rows() != need)
        throw std::invalid_argument("multiply: block has " + std::to_string(block.rows()) +
                                    " rows, expected " + std::to_string(need));
}

// P * (Sigma * (Q^T * block)), the low-rank half of a product.
Matrix lowrank_product(const PartialSVD& z, const Matrix& block, bool transposed) {
    const Matrix& left = transposed ? z.q() : z.p();
    const Matrix& right = transposed ? z.p() : z.q();
    if (z.rank() == 0) return Matrix::Zero(left.rows(), block.cols());
    return left * (z.sigma().asDiagonal() * (right.transpose() * block));
}

}  // namespace

std::uint64_t sparse_scans() { return g_sparse_scans.load(); }
void reset_sparse_scans() { g_sparse_scans.store(0); }

Matrix multiply(const SparseMatrix& a, const Matrix& block) {
    if (block.rows() != a.n_cols())
        throw std::invalid_argument("multiply: block has " + std::to_string(block.rows()) +
                                    " rows, expected " + std::to_string(a.n_cols()));
    Matrix out = Matrix::Zero(a.n_rows(), block.cols());
    const auto row_ptr = a.row_ptr();
    const auto cols = a.cols();
    const auto values = a.values();
    const Index m = a.n_rows();
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < m; ++r) {
        for (Index e = row_ptr[r]; e < row_ptr[r + 1]; ++e)
            out.row(r) += values[e] * block.row(cols[e]);
    }
    ++g_sparse_scans;
    return out;
}

Matrix multiply_t(const SparseMatrix& a, const Matrix& block) {
    if (block.rows() != a.n_rows())
        throw std::invalid_argument("multiply_t: block has " + std::to_string(block.rows()) +
                                    " rows, expected " + std::to_string(a.n_rows()));
    Matrix out = Matrix::Zero(a.n_cols(), block.cols());
    const auto col_ptr = a.col_ptr();
    const auto order = a.col_order();
    const auto rows = a.rows();
    const auto values = a.values();
    const Index n = a.n_cols();
#pragma omp parallel for schedule(static)
    for (Index c = 0; c < n; ++c) {
        for (Index i = col_ptr[c]; i < col_ptr[c + 1]; ++i) {
            const Index e = order[i];
            out.row(c) += values[e] * block.row(rows[e]);
        }
    }
    ++g_sparse_scans;
    return out;
}

Matrix multiply(const SparsePlusLowRank& a, const Matrix& block) {
    check_multiply_dims(a, block, false);
    return multiply(a.sparse, block) + lowrank_product(a.lowrank, block, false);
}

Matrix multiply_t(const SparsePlusLowRank& a, const Matrix& block) {
    check_multiply_dims(a, block, true);
    return multiply_t(a.sparse, block) + lowrank_product(a.lowrank, block, true);
}

Vector matvec(const SparsePlusLowRank& a, const Vector& v) {
    return multiply(a, v);
}

Vector matvec_t(const SparsePlusLowRank& a, const Vector& v) {
    return multiply_t(a, v);
}

Vector project_values(const PartialSVD& z, std::span<const Index> rows,
                      std::span<const Index> cols) {
    if (rows.size() != cols.size())
        throw std::invalid_argument("project_values: index arrays differ in length");
    const auto n = static_cast<Index>(rows.size());
    Vector out = Vector::Zero(n);
    if (z.rank() == 0) return out;
    const Matrix weighted_q = z.q() * z.sigma().asDiagonal();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        if (rows[i] < 0 || rows[i] >= z.n_rows() || cols[i] < 0 || cols[i] >= z.n_cols())
            continue;  // range checked below, outside the parallel region
        out[i] = z.p().row(rows[i]).dot(weighted_q.row(cols[i]));
    }
    for (Index i = 0; i < n; ++i) {
        if (rows[i] < 0 || rows[i] >= z.n_rows() || cols[i] < 0 || cols[i] >= z.n_cols())
            throw std::invalid_argument("project_values: index out of range");
    }
    return out;
}

SparseMatrix project(const PartialSVD& z, const SparseMatrix& omega) {
    if (omega.n_rows() > z.n_rows() || omega.n_cols() > z.n_cols())
        throw std::invalid_argument("project: pattern exceeds factor dimensions");
    const Vector vals = project_values(z, omega.rows(), omega.cols());
    std::vector<Triplet> entries(omega.nnz());
    for (Index i = 0; i < omega.nnz(); ++i)
        entries[i] = {omega.rows()[i], omega.cols()[i], vals[i]};
    return SparseMatrix(z.n_rows(), z.n_cols(), std::move(entries));
}

SparseMatrix residual_on_omega(const SparseMatrix& x, const PartialSVD& z) {
    if (x.n_rows() != z.n_rows() || x.n_cols() != z.n_cols())
        throw std::invalid_argument("residual_on_omega: shape mismatch");
    const Vector predicted = project_values(z, x.rows(), x.cols());
    std::vector<Triplet> entries(x.nnz());
    for (Index i = 0; i < x.nnz(); ++i)
        entries[i] = {x.rows()[i], x.cols()[i], x.values()[i] - predicted[i]};
    return SparseMatrix(x.n_rows(), x.n_cols(), std::move(entries));
}

Matrix densify(const SparseMatrix& x) {
    Matrix out = Matrix::Zero(x.n_rows(), x.n_cols());
    for (Index i = 0; i < x.nnz(); ++i) out(x.rows()[i], x.cols()[i]) = x.values()[i];
    return out;
}

Matrix densify(const PartialSVD& z) {
    if (z.rank() == 0) return Matrix::Zero(z.n_rows(), z.n_cols());
    return z.p() * z.sigma().asDiagonal() * z.q().transpose();
}

Matrix densify(const SparsePlusLowRank& a) {
    return densify(a.sparse) + densify(a.lowrank);
}

namespace serial {

Matrix multiply(const SparsePlusLowRank& a, const Matrix& block) {
    check_multiply_dims(a, block, false);
    const Index m = a.n_rows();
    const Index t = block.cols();
    Matrix out = Matrix::Zero(m, t);
    // Low-rank half via explicit loops so the reference shares no code
    // path with the parallel kernel.
    const PartialSVD& z = a.lowrank;
    for (Index l = 0; l < z.rank(); ++l) {
        Vector qt_b = Vector::Zero(t);
        for (Index j = 0; j < t; ++j) {
            double s = 0.0;
            for (Index i = 0; i < a.n_cols(); ++i) s += z.q()(i, l) * block(i, j);
            qt_b[j] = s;
        }
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < t; ++j) out(i, j) += z.p()(i, l) * z.sigma()[l] * qt_b[j];
    }
    for (Index e = 0; e < a.sparse.nnz(); ++e) {
        const Index r = a.sparse.rows()[e];
        const Index c = a.sparse.cols()[e];
        for (Index j = 0; j < t; ++j) out(r, j) += a.sparse.values()[e] * block(c, j);
    }
    return out;
}

Matrix multiply_t(const SparsePlusLowRank& a, const Matrix& block) {
    check_multiply_dims(a, block, true);
    const Index n = a.n_cols();
    const Index t = block.cols();
    Matrix out = Matrix::Zero(n, t);
    const PartialSVD& z = a.lowrank;
    for (Index l = 0; l < z.rank(); ++l) {
        Vector pt_b = Vector::Zero(t);
        for (Index j = 0; j < t; ++j) {
            double s = 0.0;
            for (Index i = 0; i < a.n_rows(); ++i) s += z.p()(i, l) * block(i, j);
            pt_b[j] = s;
        }
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < t; ++j) out(i, j) += z.q()(i, l) * z.sigma()[l] * pt_b[j];
    }
    for (Index e = 0; e < a.sparse.nnz(); ++e) {
        const Index r = a.sparse.rows()[e];
        const Index c = a.sparse.cols()[e];
        for (Index j = 0; j < t; ++j) out(c, j) += a.sparse.values()[e] * block(r, j);
    }
    return out;
}

Vector project_values(const PartialSVD& z, std::span<const Index> rows,
                      std::span<const Index> cols) {
    if (rows.size() != cols.size())
        throw std::invalid_argument("project_values: index arrays differ in length");
    Vector out = Vector::Zero(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= z.n_rows() || cols[i] < 0 || cols[i] >= z.n_cols())
            throw std::invalid_argument("project_values: index out of range");
        double s = 0.0;
        for (Index l = 0; l < z.rank(); ++l)
            s += z.p()(rows[i], l) * z.sigma()[l] * z.q()(cols[i], l);
        out[static_cast<Index>(i)] = s;
    }
    return out;
}

}  // namespace serial

}  // namespace omc::kernels
