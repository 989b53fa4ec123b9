#pragma once

#include "omc/rsvd.hpp"

#include <vector>

namespace omc {

enum class SvdBackend {
    exact_dense,        // full dense SVD every step; reference quality, O(mn*min(m,n))
    randomized,         // fresh Gaussian range finder every step
    randomized_seeded,  // range finder seeded with the previous iterate's right factors
};

struct SolverConfig {
    double epsilon = 1e-3;       // stop once the relative squared change falls below this
    Index max_iterations = 100;  // per lambda
    SvdBackend backend = SvdBackend::exact_dense;
    RsvdParams rsvd;             // rank budget and seed for the randomized backends
    bool capture_drift_trace = false;
};

/// Per-iteration factor drift inside one solve: how much the left/right
/// singular subspaces and the thresholded singular values moved between
/// consecutive iterates.
struct DriftTrace {
    std::vector<double> theta_p;
    std::vector<double> theta_q;
    std::vector<double> phi_sigma;
};

struct CompletionSolution {
    PartialSVD z = PartialSVD::zero(0, 0);
    double lambda = 0.0;
    Index iterations = 0;
    bool converged = false;
    std::vector<double> gamma_trace;      // one entry per iteration
    std::vector<double> objective_trace;  // length iterations + 1, starting at the seed
    DriftTrace drift;                     // filled when capture_drift_trace is set
};

/// Singular-value soft thresholding: sigma_i <- max(sigma_i - lambda, 0),
/// columns with zero sigma dropped.
PartialSVD shrink(const PartialSVD& svd, double lambda);

/// One fixed-point step: the SVD of [observed residual] + [current iterate]
/// through the configured backend, then shrink. The combined matrix is
/// never densified except by the exact backend. Randomized backends
/// truncate the shrunk result to the configured rank budget.
PartialSVD impute_step(const SparseMatrix& x, const PartialSVD& z, double lambda,
                       const SolverConfig& config);

/// ||z_new - z_old||_F^2 / ||z_old||_F^2 computed through k x k factor
/// products. A zero z_old yields +inf (or 0 when z_new is zero too) so a
/// cold start never stops on its first step.
double relative_change(const PartialSVD& z_new, const PartialSVD& z_old);

/// 1/2 ||observed residual||_F^2 + lambda * ||z||_*; cost O(|omega| k).
double objective(const SparseMatrix& x, const PartialSVD& z, double lambda);

/// Iterate impute_step from z_init until relative_change <= epsilon or the
/// iteration cap; hitting the cap is a flagged (converged=false) success.
CompletionSolution solve(const SparseMatrix& x, double lambda, const PartialSVD& z_init,
                         const SolverConfig& config);

/// Solutions along a strictly decreasing lambda sequence, each solve seeded
/// with the previous solution.
std::vector<CompletionSolution> solve_path(const SparseMatrix& x,
                                           const std::vector<double>& lambdas,
                                           const SolverConfig& config);
std::vector<CompletionSolution> solve_path(const SparseMatrix& x,
                                           const std::vector<double>& lambdas,
                                           const SolverConfig& config,
                                           const PartialSVD& z_init);

/// Mean |f(Z) - f(Z_hat)| over derived seeds, where Z applies exact-SVD
/// shrinkage to the combined matrix at the current iterate and Z_hat uses
/// the width-2k randomized factorization (oversampling fixed to p = k).
/// Also returns the combined matrix's full spectrum, which is what the
/// matching closed-form gap bound consumes.
struct GapTrials {
    double mean_gap = 0.0;
    Vector spectrum;
    int trials = 0;
};
GapTrials objective_gap_trials(const SparseMatrix& x, const PartialSVD& z, double lambda,
                               Index k, Index q, std::uint64_t seed, int trials);

}  // namespace omc
