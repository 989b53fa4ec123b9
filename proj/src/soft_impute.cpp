#include "omc/soft_impute.hpp"

#include "omc/eval.hpp"
#include "omc/kernels.hpp"

#include <cmath>
#include <limits>

namespace omc {

namespace {

void check_config(const SolverConfig& config, const char* who) {
    if (!(config.epsilon > 0.0))
        throw std::invalid_argument(std::string(who) + ": epsilon must be positive");
    if (config.max_iterations < 1)
        throw std::invalid_argument(std::string(who) + ": max_iterations must be >= 1");
}

void check_shapes(const SparseMatrix& x, const PartialSVD& z, const char* who) {
    if (x.n_rows() != z.n_rows() || x.n_cols() != z.n_cols())
        throw std::invalid_argument(std::string(who) + ": x and z shapes differ");
}

// tr(A^T B) for two factorizations, via k x k products only.
double factor_inner_product(const PartialSVD& a, const PartialSVD& b) {
    if (a.rank() == 0 || b.rank() == 0) return 0.0;
    const Matrix gp = a.p().transpose() * b.p();
    const Matrix gq = a.q().transpose() * b.q();
    return (a.sigma().asDiagonal() * gp * b.sigma().asDiagonal()).cwiseProduct(gq).sum();
}

}  // namespace

PartialSVD shrink(const PartialSVD& svd, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("shrink: negative lambda");
    const Vector thresholded = (svd.sigma().array() - lambda).max(0.0);
    Index keep = 0;
    while (keep < thresholded.size() && thresholded[keep] > 0.0) ++keep;
    if (keep == svd.rank()) return PartialSVD(svd.p(), thresholded, svd.q());
    return PartialSVD(svd.p().leftCols(keep), thresholded.head(keep), svd.q().leftCols(keep));
}

PartialSVD impute_step(const SparseMatrix& x, const PartialSVD& z, double lambda,
                       const SolverConfig& config) {
    check_shapes(x, z, "impute_step");
    if (lambda < 0.0) throw std::invalid_argument("impute_step: negative lambda");
    // Observed residual plus the current iterate is exactly
    // P_obs(X) + P_unobs(Z), kept in sparse-plus-low-rank form.
    SparseMatrix residual = kernels::residual_on_omega(x, z);
    for (const double v : residual.values())
        if (!std::isfinite(v))
            throw NumericalError("impute_step: non-finite residual entry");
    const SparsePlusLowRank y(std::move(residual), z);
    PartialSVD factors = [&]() {
        switch (config.backend) {
            case SvdBackend::exact_dense:
                return exact_svd(y);
            case SvdBackend::randomized:
                return randomized_svd(y, config.rsvd);
            case SvdBackend::randomized_seeded:
                return seeded_svd_update(z, y, config.rsvd);
        }
        throw std::invalid_argument("impute_step: unknown backend");
    }();
    if (!factors.sigma().allFinite())
        throw NumericalError("impute_step: backend produced non-finite singular values");
    PartialSVD out = shrink(factors, lambda);
    if (config.backend != SvdBackend::exact_dense) out = out.truncated(config.rsvd.k);
    return out;
}

double relative_change(const PartialSVD& z_new, const PartialSVD& z_old) {
    if (z_new.n_rows() != z_old.n_rows() || z_new.n_cols() != z_old.n_cols())
        throw std::invalid_argument("relative_change: shapes differ");
    const double denom = z_old.squared_norm();
    const double nn = z_new.squared_norm();
    if (denom == 0.0) return nn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    const double num =
        std::max(0.0, nn + denom - 2.0 * factor_inner_product(z_new, z_old));
    return num / denom;
}

double objective(const SparseMatrix& x, const PartialSVD& z, double lambda) {
    check_shapes(x, z, "objective");
    return 0.5 * kernels::residual_on_omega(x, z).squared_norm() + lambda * z.nuclear_norm();
}

CompletionSolution solve(const SparseMatrix& x, double lambda, const PartialSVD& z_init,
                         const SolverConfig& config) {
    check_config(config, "solve");
    check_shapes(x, z_init, "solve");
    if (lambda < 0.0) throw std::invalid_argument("solve: negative lambda");
    CompletionSolution sol;
    sol.lambda = lambda;
    PartialSVD z = z_init;
    sol.objective_trace.push_back(objective(x, z, lambda));
    for (Index it = 0; it < config.max_iterations; ++it) {
        SolverConfig step = config;
        step.rsvd.seed = derive_seed(config.rsvd.seed, static_cast<std::uint64_t>(it));
        PartialSVD z_new = impute_step(x, z, lambda, step);
        const double gamma = relative_change(z_new, z);
        sol.gamma_trace.push_back(gamma);
        sol.objective_trace.push_back(objective(x, z_new, lambda));
        if (config.capture_drift_trace) {
            const DriftMeasures d = drift_between(z, z_new);
            sol.drift.theta_p.push_back(d.theta_p);
            sol.drift.theta_q.push_back(d.theta_q);
            sol.drift.phi_sigma.push_back(d.phi_sigma);
        }
        z = std::move(z_new);
        sol.iterations = it + 1;
        if (gamma <= config.epsilon) {
            sol.converged = true;
            break;
        }
    }
    sol.z = std::move(z);
    return sol;
}

std::vector<CompletionSolution> solve_path(const SparseMatrix& x,
                                           const std::vector<double>& lambdas,
                                           const SolverConfig& config) {
    return solve_path(x, lambdas, config, PartialSVD::zero(x.n_rows(), x.n_cols()));
}

std::vector<CompletionSolution> solve_path(const SparseMatrix& x,
                                           const std::vector<double>& lambdas,
                                           const SolverConfig& config,
                                           const PartialSVD& z_init) {
    if (lambdas.empty()) throw std::invalid_argument("solve_path: empty lambda list");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] < 0.0) throw std::invalid_argument("solve_path: negative lambda");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
            throw std::invalid_argument("solve_path: lambdas must be strictly decreasing");
    }
    std::vector<CompletionSolution> out;
    out.reserve(lambdas.size());
    PartialSVD z = z_init;
    for (const double lambda : lambdas) {
        out.push_back(solve(x, lambda, z, config));
        z = out.back().z;
    }
    return out;
}

GapTrials objective_gap_trials(const SparseMatrix& x, const PartialSVD& z, double lambda,
                               Index k, Index q, std::uint64_t seed, int trials) {
    check_shapes(x, z, "objective_gap_trials");
    if (trials < 1) throw std::invalid_argument("objective_gap_trials: trials must be >= 1");
    const SparsePlusLowRank y(kernels::residual_on_omega(x, z), z);
    const PartialSVD exact = exact_svd(y);
    GapTrials out;
    out.trials = trials;
    out.spectrum = exact.sigma();
    const double f_exact = objective(x, shrink(exact, lambda), lambda);
    RsvdParams params{k, k, q, 0};
    for (int t = 0; t < trials; ++t) {
        params.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        const double f_approx = objective(x, shrink(randomized_svd(y, params), lambda), lambda);
        out.mean_gap += std::abs(f_exact - f_approx);
    }
    out.mean_gap /= trials;
    return out;
}

}  // namespace omc
