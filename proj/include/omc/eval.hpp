#pragma once

#include "omc/online.hpp"

#include <cstdint>
#include <utility>

namespace omc {

/// Per-row means of observed training entries; rows without observations
/// carry 0. Transforms derived from a training matrix are reused verbatim
/// for its test split.
struct CenteringInfo {
    Vector row_means;
};

/// sqrt(mean over observed entries of (truth - prediction)^2). When
/// centering info is given the predictions are shifted back to the
/// original scale first (truth is expected uncentered then).
double rmse(const SparseMatrix& truth, const PartialSVD& predicted,
            const CenteringInfo* centering = nullptr);

/// Drift of one orthonormal block against another with the same shape:
/// (k - ||current^T previous||_F^2) / k, in [0, 1]. 0 for identical
/// subspaces, 1 for mutually orthogonal ones. Computed from the k x k
/// product; the m x m projector form is algebraically equal but never
/// materialized.
double subspace_drift(const Matrix& current, const Matrix& previous);

/// ||current - previous||^2 / ||current||^2 with the shorter vector
/// zero-padded; +inf when current is all zero and previous is not.
double sigma_drift(const Vector& current, const Vector& previous);

/// The three drift measures between two factorizations that may differ in
/// shape and rank: the earlier one is zero-padded to the later shape and
/// both subspaces are truncated to the common rank. A rank-0 side makes
/// the subspace measures 1 (or 0 when both are rank-0).
struct DriftMeasures {
    double theta_p = 0.0;
    double theta_q = 0.0;
    double phi_sigma = 0.0;
};
DriftMeasures drift_between(const PartialSVD& previous, const PartialSVD& current);

/// Subtract each row's observed mean from that row's entries.
std::pair<SparseMatrix, CenteringInfo> center_rows(const SparseMatrix& train);
/// Shift another matrix's entries by the same training-derived means.
SparseMatrix apply_centering(const SparseMatrix& test, const CenteringInfo& info);
/// Undo the shift on predicted values at the given row coordinates.
Vector uncenter(const Vector& values, std::span<const Index> rows, const CenteringInfo& info);

/// Refit the singular values of z by nonnegative least squares on (a
/// uniform subsample of at most `cap`) observed entries of x, holding the
/// singular vectors fixed. Projected gradient with step 1/L, warm-started
/// at the current values; the sampled squared residual never increases.
/// The refit values are re-sorted with their columns; zeros are dropped.
PartialSVD postprocess_sigma(const SparseMatrix& x, const PartialSVD& z,
                             Index cap = 1000000, std::uint64_t seed = 0);

/// Synthetic sequence family: one fixed low-rank matrix with Haar factors
/// and uniform singular values, globally scaled to unit entry standard
/// deviation. Matrix t observes the leading block at the scheduled size
/// with the scheduled probability, adds observation noise, and splits the
/// observations evenly into train and test.
struct SyntheticSpec {
    Index t_total = 20;
    Index rows_start = 5000;
    Index cols_start = 1000;
    Index rows_end = 10000;
    Index cols_end = 1500;
    Index rank = 50;
    double obs_prob_start = 0.03;  // climbs in equal steps over the first half
    double obs_prob_end = 0.10;    // then stays here while sizes grow
    double noise_std = 0.1;
    std::uint64_t seed = 0;

    /// Copy with all four dimensions multiplied by `factor` (rank is left
    /// alone; pick it to suit the scale).
    SyntheticSpec scaled(double factor) const;
};

struct SyntheticData {
    MatrixSequence train;
    MatrixSequence test;
};
SyntheticData generate_synthetic(const SyntheticSpec& spec);

struct ModelSelectionGrid {
    std::vector<double> rhos = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40};
    std::vector<Index> ks = {8, 16, 32, 64, 128};
    int folds = 5;
    Index max_sampled_entries = 5000000;
};

struct ModelSelectionResult {
    double rho = 0.0;
    Index k = 0;
    double cv_rmse = 0.0;
    // mean validation RMSE per (ks index, rhos index)
    std::vector<std::vector<double>> table;
};

/// Cross-validated choice of (rho, k): folds partition a uniform sample of
/// at most max_sampled_entries observed entries, every fold solves the
/// whole (descending-lambda) rho path per k, and the pair with the lowest
/// mean validation RMSE wins. Exact ties prefer smaller k, then larger
/// rho. Grid cells run concurrently when OpenMP is available.
ModelSelectionResult select_model(const SparseMatrix& x, const ModelSelectionGrid& grid,
                                  const SolverConfig& config, bool center,
                                  std::uint64_t seed);

}  // namespace omc
