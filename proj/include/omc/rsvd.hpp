#pragma once

#include "omc/types.hpp"

#include <cstdint>

namespace omc {

struct RsvdParams {
    Index k = 10;  // target rank
    Index p = 5;   // oversampling columns
    Index q = 1;   // power-scheme exponent
    std::uint64_t seed = 0;
};

// Metadata about one decomposition run.
struct RsvdInfo {
    Index requested_width = 0;  // k + p (prior rank + p on the seeded path)
    Index effective_width = 0;  // after clipping to min(m, n)
    bool clipped = false;
    std::uint64_t scans = 0;  // passes over the sparse entries
};

// Stable stream derivation (splitmix64) so one user-facing seed can feed
// many independent generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// i.i.d. standard normal entries; bit-identical for a fixed seed.
Matrix gaussian_block(Index rows, Index cols, std::uint64_t seed);

// Orthonormal basis of the column space. Rank-revealing: rank-deficient
// input yields fewer columns.
Matrix orthonormalize(const Matrix& block);

// Sign-normalize paired factor columns: the first coordinate of each left
// column that is clearly nonzero (above 1e-8 of the column's max) is made
// positive, and the matching right column is flipped along with it.
void apply_sign_convention(Matrix& left, Matrix& right);

/// Range-projection SVD: Y = (A A^T)^q A Omega with a Gaussian Omega of
/// width k+p, re-orthonormalized before every multiplication, then the
/// small SVD of the projected matrix. Returns all k+p computed singular
/// pairs (truncation to k is the caller's decision).
PartialSVD randomized_svd(const SparsePlusLowRank& a, const RsvdParams& params,
                          RsvdInfo* info = nullptr);

/// Same projection scheme but seeded with the prior's right factors:
/// the projection block is [prior.Q | Omega_hat] with Omega_hat an n x p
/// Gaussian block, and no power iteration is run. The product A * prior.Q
/// multiplies only the sparse part explicitly; the low-rank part is pushed
/// through its own factors. A rank-0 prior falls back to randomized_svd.
PartialSVD seeded_svd_update(const PartialSVD& prior, const SparsePlusLowRank& target,
                             const RsvdParams& params, RsvdInfo* info = nullptr);

/// Dense SVD of the fully materialized matrix; reference backend and test
/// oracle. max_rank < 0 keeps all min(m, n) singular pairs.
PartialSVD exact_svd(const SparsePlusLowRank& a, Index max_rank = -1);
PartialSVD exact_svd(const Matrix& a, Index max_rank = -1);

// Largest singular value by alternating power iteration; relative
// tolerance 1e-12, at most 1000 sweeps.
double leading_singular_value(const SparseMatrix& x, std::uint64_t seed);

// Dense m x n matrix with prescribed singular values and Haar-random
// singular vectors.
Matrix matrix_with_spectrum(Index m, Index n, const Vector& sigma, std::uint64_t seed);

/// Mean reconstruction errors of randomized_svd over `trials` derived
/// seeds; these are the sample averages that the expectation-form error
/// bounds are checked against.
struct TrialSummary {
    double mean_spectral_error = 0.0;  // mean of ||a - reconstruction||_2
    double mean_residual_sq = 0.0;     // mean of ||a - reconstruction||_F^2
    int trials = 0;
};
TrialSummary rsvd_error_trials(const Matrix& a, const RsvdParams& params, int trials);

}  // namespace omc
