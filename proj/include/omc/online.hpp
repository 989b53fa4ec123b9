#pragma once

#include "omc/soft_impute.hpp"

#include <string>
#include <vector>

namespace omc {

/// Ordered snapshots X_1..X_T of a growing partially observed matrix.
/// Sizes may grow along the sequence, never shrink.
struct MatrixSequence {
    std::vector<SparseMatrix> matrices;
    std::vector<std::string> labels;  // one per matrix, e.g. slice end date
};

enum class RestartMode { warm, cold };

struct OnlineConfig {
    SolverConfig solver;
    double rho = 0.5;          // lambda = rho * sigma_1 of each training matrix
    bool center = true;        // row-center training entries, mirror onto test
    bool postprocess = false;  // refit singular values before scoring
};

struct SequenceRecord {
    std::string label;
    double train_rmse = 0.0;
    double test_rmse = 0.0;  // NaN when the test slice has no entries
    double theta_p = 0.0;    // drift vs the previous solution; NaN on the first record
    double theta_q = 0.0;
    double phi_sigma = 0.0;
    double seconds = 0.0;  // wall time of the solve only
    Index rank = 0;
    double lambda = 0.0;
    Index iterations = 0;
    bool converged = false;
};

struct SequenceResult {
    RestartMode mode = RestartMode::warm;
    std::vector<SequenceRecord> records;
    std::vector<CompletionSolution> solutions;  // raw per-matrix solver output
    Index total_iterations = 0;
};

/// Solve the sequence in order with one rho. Warm mode seeds each solve
/// with the previous solution zero-padded to the new shape; cold mode
/// starts every solve from zero. Each matrix's lambda comes from its own
/// leading singular value. Drift measures compare raw consecutive
/// solutions; the postprocess flag only affects the reported RMSEs.
SequenceResult run_sequence(const MatrixSequence& train, const MatrixSequence& test,
                            const OnlineConfig& config, RestartMode mode);

}  // namespace omc
