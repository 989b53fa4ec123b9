#include "omc/rsvd.hpp"

#include "omc/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace omc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_shape(Index m, Index n, const char* who) {
    if (m <= 0 || n <= 0)
        throw std::invalid_argument(std::string(who) + ": degenerate dimensions " +
                                    std::to_string(m) + "x" + std::to_string(n));
}

void check_params(const RsvdParams& params, const char* who) {
    if (params.k < 1) throw std::invalid_argument(std::string(who) + ": k must be >= 1");
    if (params.p < 0) throw std::invalid_argument(std::string(who) + ": p must be >= 0");
    if (params.q < 0) throw std::invalid_argument(std::string(who) + ": q must be >= 0");
}

// Small SVD of the projected matrix B = V^T A, lifted back through V.
PartialSVD svd_from_basis(const SparsePlusLowRank& a, const Matrix& v, std::uint64_t* scans) {
    if (v.cols() == 0) return PartialSVD::zero(a.n_rows(), a.n_cols());
    const Matrix b = kernels::multiply_t(a, v).transpose();
    ++*scans;
    Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix p = v * svd.matrixU();
    Matrix q = svd.matrixV();
    apply_sign_convention(p, q);
    return PartialSVD(std::move(p), svd.singularValues(), std::move(q));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Matrix gaussian_block(Index rows, Index cols, std::uint64_t seed) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("gaussian_block: negative shape");
    Matrix out(rows, cols);
    if (out.size() == 0) return out;
    std::mt19937_64 gen(seed);
    // Box-Muller on [0,1) words; avoids distribution implementations that
    // differ across standard libraries.
    auto uniform = [&gen]() { return (gen() >> 11) * 0x1.0p-53; };
    double* data = out.data();
    const Index total = out.size();
    for (Index i = 0; i < total; i += 2) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        data[i] = radius * std::cos(kTwoPi * u2);
        if (i + 1 < total) data[i + 1] = radius * std::sin(kTwoPi * u2);
    }
    return out;
}

Matrix orthonormalize(const Matrix& block) {
    if (block.rows() == 0 || block.cols() == 0) return Matrix(block.rows(), 0);
    Eigen::ColPivHouseholderQR<Matrix> qr(block);
    const Index r = qr.rank();
    if (r == 0) return Matrix(block.rows(), 0);
    return qr.householderQ() * Matrix::Identity(block.rows(), r);
}

void apply_sign_convention(Matrix& left, Matrix& right) {
    if (left.cols() != right.cols())
        throw std::invalid_argument("apply_sign_convention: column count mismatch");
    for (Index c = 0; c < left.cols(); ++c) {
        const double peak = left.col(c).cwiseAbs().maxCoeff();
        if (peak == 0.0) continue;
        // "First nonzero coordinate" with a roundoff guard: coordinates
        // below 1e-8 of the column peak do not decide the sign.
        for (Index r = 0; r < left.rows(); ++r) {
            const double x = left(r, c);
            if (std::abs(x) > 1e-8 * peak) {
                if (x < 0.0) {
                    left.col(c) = -left.col(c);
                    right.col(c) = -right.col(c);
                }
                break;
            }
        }
    }
}

PartialSVD randomized_svd(const SparsePlusLowRank& a, const RsvdParams& params, RsvdInfo* info) {
    const Index m = a.n_rows();
    const Index n = a.n_cols();
    check_shape(m, n, "randomized_svd");
    check_params(params, "randomized_svd");
    const Index requested = params.k + params.p;
    const Index width = std::min(requested, std::min(m, n));
    std::uint64_t scans = 0;

    Matrix y = kernels::multiply(a, gaussian_block(n, width, derive_seed(params.seed, 0)));
    ++scans;
    for (Index it = 0; it < params.q; ++it) {
        const Matrix v = orthonormalize(y);
        y = kernels::multiply(a, kernels::multiply_t(a, v));
        scans += 2;
    }
    const Matrix v = orthonormalize(y);
    PartialSVD result = svd_from_basis(a, v, &scans);
    if (info) *info = {requested, width, width < requested, scans};
    return result;
}

PartialSVD seeded_svd_update(const PartialSVD& prior, const SparsePlusLowRank& target,
                             const RsvdParams& params, RsvdInfo* info) {
    if (prior.rank() == 0) return randomized_svd(target, params, info);
    const Index m = target.n_rows();
    const Index n = target.n_cols();
    check_shape(m, n, "seeded_svd_update");
    check_params(params, "seeded_svd_update");
    if (prior.n_rows() != m || prior.n_cols() != n)
        throw std::invalid_argument("seeded_svd_update: prior is " +
                                    std::to_string(prior.n_rows()) + "x" +
                                    std::to_string(prior.n_cols()) + ", target is " +
                                    std::to_string(m) + "x" + std::to_string(n));
    std::uint64_t scans = 0;

    // A * prior.Q with one scan of the sparse part; the low-rank part goes
    // through its own factors, never through a fresh dense product.
    Matrix y_seed = kernels::multiply(target.sparse, prior.q());
    ++scans;
    const PartialSVD& lr = target.lowrank;
    if (lr.rank() > 0)
        y_seed += lr.p() * (lr.sigma().asDiagonal() * (lr.q().transpose() * prior.q()));

    const Index requested = prior.rank() + params.p;
    const Index extra = std::max<Index>(0, std::min(params.p, std::min(m, n) - prior.rank()));
    Matrix y(m, prior.rank() + extra);
    y.leftCols(prior.rank()) = y_seed;
    if (extra > 0) {
        y.rightCols(extra) =
            kernels::multiply(target, gaussian_block(n, extra, derive_seed(params.seed, 0)));
        ++scans;
    }
    // No power iteration on the seeded path.
    const Matrix v = orthonormalize(y);
    PartialSVD result = svd_from_basis(target, v, &scans);
    if (info) *info = {requested, prior.rank() + extra, extra < params.p, scans};
    return result;
}

PartialSVD exact_svd(const Matrix& a, Index max_rank) {
    check_shape(a.rows(), a.cols(), "exact_svd");
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Index keep = svd.singularValues().size();
    if (max_rank >= 0) keep = std::min(keep, max_rank);
    Matrix p = svd.matrixU().leftCols(keep);
    Matrix q = svd.matrixV().leftCols(keep);
    apply_sign_convention(p, q);
    return PartialSVD(std::move(p), svd.singularValues().head(keep), std::move(q));
}

PartialSVD exact_svd(const SparsePlusLowRank& a, Index max_rank) {
    return exact_svd(kernels::densify(a), max_rank);
}

double leading_singular_value(const SparseMatrix& x, std::uint64_t seed) {
    if (x.nnz() == 0) return 0.0;
    Matrix v = gaussian_block(x.n_cols(), 1, derive_seed(seed, 0));
    double estimate = 0.0;
    for (int sweep = 0; sweep < 1000; ++sweep) {
        Matrix u = kernels::multiply(x, v);
        const double nu = u.norm();
        if (nu == 0.0) {
            // Start vector fell in the null space; redraw.
            v = gaussian_block(x.n_cols(), 1, derive_seed(seed, 1 + sweep));
            continue;
        }
        u /= nu;
        Matrix w = kernels::multiply_t(x, u);
        const double next = w.norm();  // = ||x^T u||, the current estimate
        if (next == 0.0) return 0.0;
        v = w / next;
        const bool settled = std::abs(next - estimate) <= 1e-12 * next;
        estimate = next;
        if (settled) break;
    }
    return estimate;
}

Matrix matrix_with_spectrum(Index m, Index n, const Vector& sigma, std::uint64_t seed) {
    check_shape(m, n, "matrix_with_spectrum");
    const Index r = sigma.size();
    if (r > std::min(m, n))
        throw std::invalid_argument("matrix_with_spectrum: more singular values than min(m, n)");
    if (r == 0) return Matrix::Zero(m, n);
    const Matrix u = orthonormalize(gaussian_block(m, r, derive_seed(seed, 1)));
    const Matrix v = orthonormalize(gaussian_block(n, r, derive_seed(seed, 2)));
    if (u.cols() != r || v.cols() != r)
        throw NumericalError("matrix_with_spectrum: random factor block lost rank");
    return u * sigma.asDiagonal() * v.transpose();
}

TrialSummary rsvd_error_trials(const Matrix& a, const RsvdParams& params, int trials) {
    if (trials < 1) throw std::invalid_argument("rsvd_error_trials: trials must be >= 1");
    const SparsePlusLowRank wrapped(sparse_from_dense(a),
                                    PartialSVD::zero(a.rows(), a.cols()));
    TrialSummary summary;
    summary.trials = trials;
    for (int t = 0; t < trials; ++t) {
        RsvdParams trial = params;
        trial.seed = derive_seed(params.seed, static_cast<std::uint64_t>(t));
        const PartialSVD approx = randomized_svd(wrapped, trial);
        const Matrix err = a - kernels::densify(approx);
        summary.mean_spectral_error += Eigen::BDCSVD<Matrix>(err).singularValues()(0);
        summary.mean_residual_sq += err.squaredNorm();
    }
    summary.mean_spectral_error /= trials;
    summary.mean_residual_sq /= trials;
    return summary;
}

}  // namespace omc
