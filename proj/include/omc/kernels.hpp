#pragma once

#include "omc/types.hpp"

#include <cstdint>

namespace omc::kernels {

// Number of passes over sparse entry data since the last reset. Purely
// diagnostic; lets callers compare how often each SVD backend scans the
// observed entries.
std::uint64_t sparse_scans();
void reset_sparse_scans();

/// S * block for a sparse S and dense n x t block; OpenMP-parallel over
/// rows. Results are independent of the thread count: every output element
/// is accumulated in a fixed order.
Matrix multiply(const SparseMatrix& a, const Matrix& block);

/// S^T * block; parallel over columns of S.
Matrix multiply_t(const SparseMatrix& a, const Matrix& block);

/// (S + P Sigma Q^T) * block for a dense n x t block.
Matrix multiply(const SparsePlusLowRank& a, const Matrix& block);

/// (S + P Sigma Q^T)^T * block for a dense m x t block.
Matrix multiply_t(const SparsePlusLowRank& a, const Matrix& block);

Vector matvec(const SparsePlusLowRank& a, const Vector& v);
Vector matvec_t(const SparsePlusLowRank& a, const Vector& v);

/// Entries of P Sigma Q^T at the given coordinates; parallel over entries.
/// Cost O(|omega| k).
Vector project_values(const PartialSVD& z, std::span<const Index> rows,
                      std::span<const Index> cols);

/// Sparse matrix holding (P Sigma Q^T)_{ij} exactly for (i, j) in the
/// pattern of `omega`, nothing else.
SparseMatrix project(const PartialSVD& z, const SparseMatrix& omega);

/// Entrywise X_ij - Z_ij over the observed set of x.
SparseMatrix residual_on_omega(const SparseMatrix& x, const PartialSVD& z);

Matrix densify(const SparseMatrix& x);
Matrix densify(const PartialSVD& z);
Matrix densify(const SparsePlusLowRank& a);

// Serial reference kernels. Same contracts as the parallel versions above;
// kept for correctness tests and the kernel benchmark.
namespace serial {
Matrix multiply(const SparsePlusLowRank& a, const Matrix& block);
Matrix multiply_t(const SparsePlusLowRank& a, const Matrix& block);
Vector project_values(const PartialSVD& z, std::span<const Index> rows,
                      std::span<const Index> cols);
}  // namespace serial

}  // namespace omc::kernels
