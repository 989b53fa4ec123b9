#include "omc/online.hpp"

#include "omc/eval.hpp"
#include "omc/rsvd.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace omc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string label_for(const MatrixSequence& seq, std::size_t i) {
    if (seq.labels.size() == seq.matrices.size()) return seq.labels[i];
    if (seq.labels.empty()) return std::to_string(i + 1);
    throw std::invalid_argument("run_sequence: label count does not match matrix count");
}

}  // namespace

SequenceResult run_sequence(const MatrixSequence& train, const MatrixSequence& test,
                            const OnlineConfig& config, RestartMode mode) {
    const std::size_t count = train.matrices.size();
    if (count == 0) throw std::invalid_argument("run_sequence: empty sequence");
    if (test.matrices.size() != count)
        throw std::invalid_argument("run_sequence: train and test sequence lengths differ");
    if (!(config.rho > 0.0)) throw std::invalid_argument("run_sequence: rho must be positive");
    for (std::size_t i = 0; i < count; ++i) {
        const auto& x = train.matrices[i];
        if (x.nnz() == 0)
            throw std::invalid_argument("run_sequence: train matrix " + std::to_string(i + 1) +
                                        " has no observed entries");
        if (test.matrices[i].n_rows() != x.n_rows() || test.matrices[i].n_cols() != x.n_cols())
            throw std::invalid_argument("run_sequence: test matrix " + std::to_string(i + 1) +
                                        " shape differs from train");
        if (i > 0 && (x.n_rows() < train.matrices[i - 1].n_rows() ||
                      x.n_cols() < train.matrices[i - 1].n_cols()))
            throw std::invalid_argument("run_sequence: matrix dimensions must never shrink");
    }

    SequenceResult result;
    result.mode = mode;
    const std::uint64_t base_seed = config.solver.rsvd.seed;
    for (std::size_t i = 0; i < count; ++i) {
        const SparseMatrix& x_raw = train.matrices[i];
        SparseMatrix x = x_raw;
        CenteringInfo info;
        if (config.center) {
            auto centered = center_rows(x_raw);
            x = std::move(centered.first);
            info = std::move(centered.second);
        }
        const double sigma1 =
            leading_singular_value(x, derive_seed(base_seed, 500 + static_cast<std::uint64_t>(i)));
        const double lambda = config.rho * sigma1;

        PartialSVD z_init = PartialSVD::zero(x.n_rows(), x.n_cols());
        if (mode == RestartMode::warm && !result.solutions.empty())
            z_init = pad(result.solutions.back().z, x.n_rows(), x.n_cols());

        SolverConfig solver = config.solver;
        solver.rsvd.seed = derive_seed(base_seed, static_cast<std::uint64_t>(i));
        const auto started = std::chrono::steady_clock::now();
        CompletionSolution sol = solve(x, lambda, z_init, solver);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

        SequenceRecord rec;
        rec.label = label_for(train, i);
        rec.seconds = elapsed.count();
        rec.rank = sol.z.rank();
        rec.lambda = lambda;
        rec.iterations = sol.iterations;
        rec.converged = sol.converged;
        if (result.solutions.empty()) {
            rec.theta_p = rec.theta_q = rec.phi_sigma = kNaN;
        } else {
            const DriftMeasures d = drift_between(result.solutions.back().z, sol.z);
            rec.theta_p = d.theta_p;
            rec.theta_q = d.theta_q;
            rec.phi_sigma = d.phi_sigma;
        }

        // Reported predictions may refit the singular values, but seeding
        // and drift always use the raw solver output.
        PartialSVD reported = sol.z;
        if (config.postprocess && sol.z.rank() >= 1)
            reported = postprocess_sigma(x, sol.z, 1000000,
                                         derive_seed(base_seed, 800 + static_cast<std::uint64_t>(i)));
        const CenteringInfo* uncentering = config.center ? &info : nullptr;
        rec.train_rmse = rmse(x_raw, reported, uncentering);
        rec.test_rmse = test.matrices[i].nnz() > 0
                            ? rmse(test.matrices[i], reported, uncentering)
                            : kNaN;

        result.total_iterations += sol.iterations;
        result.records.push_back(std::move(rec));
        result.solutions.push_back(std::move(sol));
    }
    return result;
}

}  // namespace omc
