#include "omc/eval.hpp"

#include "omc/kernels.hpp"
#include "omc/rsvd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace omc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_orthonormal_block(const Matrix& block, const char* who) {
    const Index k = block.cols();
    const Matrix gram = block.transpose() * block;
    const double defect = (gram - Matrix::Identity(k, k)).norm();
    if (defect > 1e-8 * std::max<Index>(k, 1))
        throw std::invalid_argument(std::string(who) + ": block is not orthonormal");
}

double uniform01(std::mt19937_64& gen) { return (gen() >> 11) * 0x1.0p-53; }

}  // namespace

double rmse(const SparseMatrix& truth, const PartialSVD& predicted,
            const CenteringInfo* centering) {
    if (truth.n_rows() != predicted.n_rows() || truth.n_cols() != predicted.n_cols())
        throw std::invalid_argument("rmse: shapes differ");
    if (truth.nnz() == 0) throw std::invalid_argument("rmse: no observed entries");
    Vector values = kernels::project_values(predicted, truth.rows(), truth.cols());
    if (centering) values = uncenter(values, truth.rows(), *centering);
    double sum = 0.0;
    for (Index i = 0; i < truth.nnz(); ++i) {
        const double d = truth.values()[i] - values[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(truth.nnz()));
}

double subspace_drift(const Matrix& current, const Matrix& previous) {
    if (current.rows() != previous.rows() || current.cols() != previous.cols())
        throw std::invalid_argument("subspace_drift: shapes differ");
    const Index k = current.cols();
    if (k == 0) return 0.0;
    check_orthonormal_block(current, "subspace_drift");
    check_orthonormal_block(previous, "subspace_drift");
    const double overlap = (current.transpose() * previous).squaredNorm();
    return std::clamp((static_cast<double>(k) - overlap) / static_cast<double>(k), 0.0, 1.0);
}

double sigma_drift(const Vector& current, const Vector& previous) {
    const Index n = std::max(current.size(), previous.size());
    double num = 0.0;
    double cur_sq = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double c = i < current.size() ? current[i] : 0.0;
        const double p = i < previous.size() ? previous[i] : 0.0;
        num += (c - p) * (c - p);
        cur_sq += c * c;
    }
    if (cur_sq == 0.0) return num == 0.0 ? 0.0 : kInf;
    return num / cur_sq;
}

DriftMeasures drift_between(const PartialSVD& previous, const PartialSVD& current) {
    DriftMeasures d;
    d.phi_sigma = sigma_drift(current.sigma(), previous.sigma());
    const bool prev0 = previous.rank() == 0;
    const bool cur0 = current.rank() == 0;
    if (prev0 && cur0) return d;
    if (prev0 || cur0) {
        d.theta_p = d.theta_q = 1.0;
        return d;
    }
    const PartialSVD prev_padded = pad(previous, current.n_rows(), current.n_cols());
    const Index r = std::min(prev_padded.rank(), current.rank());
    d.theta_p = subspace_drift(current.p().leftCols(r), prev_padded.p().leftCols(r));
    d.theta_q = subspace_drift(current.q().leftCols(r), prev_padded.q().leftCols(r));
    return d;
}

std::pair<SparseMatrix, CenteringInfo> center_rows(const SparseMatrix& train) {
    Vector sums = Vector::Zero(train.n_rows());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(train.n_rows());
    for (Index i = 0; i < train.nnz(); ++i) {
        sums[train.rows()[i]] += train.values()[i];
        counts[train.rows()[i]] += 1;
    }
    CenteringInfo info;
    info.row_means = Vector::Zero(train.n_rows());
    for (Index r = 0; r < train.n_rows(); ++r)
        if (counts[r] > 0) info.row_means[r] = sums[r] / counts[r];
    std::vector<Triplet> entries(train.nnz());
    for (Index i = 0; i < train.nnz(); ++i)
        entries[i] = {train.rows()[i], train.cols()[i],
                      train.values()[i] - info.row_means[train.rows()[i]]};
    return {SparseMatrix(train.n_rows(), train.n_cols(), std::move(entries)), std::move(info)};
}

SparseMatrix apply_centering(const SparseMatrix& test, const CenteringInfo& info) {
    std::vector<Triplet> entries(test.nnz());
    for (Index i = 0; i < test.nnz(); ++i) {
        const Index r = test.rows()[i];
        const double mean = r < info.row_means.size() ? info.row_means[r] : 0.0;
        entries[i] = {r, test.cols()[i], test.values()[i] - mean};
    }
    return SparseMatrix(test.n_rows(), test.n_cols(), std::move(entries));
}

Vector uncenter(const Vector& values, std::span<const Index> rows, const CenteringInfo& info) {
    if (static_cast<std::size_t>(values.size()) != rows.size())
        throw std::invalid_argument("uncenter: value/row count mismatch");
    Vector out = values;
    for (Index i = 0; i < out.size(); ++i)
        if (rows[i] < info.row_means.size()) out[i] += info.row_means[rows[i]];
    return out;
}

PartialSVD postprocess_sigma(const SparseMatrix& x, const PartialSVD& z, Index cap,
                             std::uint64_t seed) {
    if (x.n_rows() != z.n_rows() || x.n_cols() != z.n_cols())
        throw std::invalid_argument("postprocess_sigma: shapes differ");
    if (z.rank() < 1) throw std::invalid_argument("postprocess_sigma: rank must be >= 1");
    if (cap < 1) throw std::invalid_argument("postprocess_sigma: cap must be >= 1");
    if (x.nnz() == 0) return z;

    std::vector<Index> picked(x.nnz());
    std::iota(picked.begin(), picked.end(), Index{0});
    if (x.nnz() > cap) {
        std::mt19937_64 gen(derive_seed(seed, 0));
        std::shuffle(picked.begin(), picked.end(), gen);
        picked.resize(cap);
        std::sort(picked.begin(), picked.end());
    }

    const Index s = static_cast<Index>(picked.size());
    const Index k = z.rank();
    // One column per singular pair: design(e, l) = p(i_e, l) * q(j_e, l).
    Matrix design(s, k);
    Vector target(s);
    for (Index e = 0; e < s; ++e) {
        const Index i = x.rows()[picked[e]];
        const Index j = x.cols()[picked[e]];
        design.row(e) = z.p().row(i).cwiseProduct(z.q().row(j));
        target[e] = x.values()[picked[e]];
    }
    const Matrix gram = design.transpose() * design;
    const Vector rhs = design.transpose() * target;
    const double lipschitz =
        Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff();
    if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) return z;

    Vector sigma = z.sigma();
    const double step = 1.0 / lipschitz;
    for (int it = 0; it < 10000; ++it) {
        const Vector next = (sigma - step * (gram * sigma - rhs)).cwiseMax(0.0);
        const double move = (next - sigma).norm();
        sigma = next;
        if (move <= 1e-8 * std::max(sigma.norm(), 1e-12)) break;
    }

    // Re-sort descending, carrying columns along; drop zeroed pairs.
    std::vector<Index> order(k);
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&sigma](Index a, Index b) { return sigma[a] > sigma[b]; });
    Index kept = 0;
    for (Index l : order)
        if (sigma[l] > 0.0) ++kept;
    if (kept == 0) return PartialSVD::zero(z.n_rows(), z.n_cols());
    Matrix p(z.n_rows(), kept);
    Matrix q(z.n_cols(), kept);
    Vector s_out(kept);
    Index at = 0;
    for (Index l : order) {
        if (sigma[l] <= 0.0) continue;
        p.col(at) = z.p().col(l);
        q.col(at) = z.q().col(l);
        s_out[at] = sigma[l];
        ++at;
    }
    return PartialSVD(std::move(p), std::move(s_out), std::move(q));
}

SyntheticSpec SyntheticSpec::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("SyntheticSpec::scaled: factor must be > 0");
    auto mul = [factor](Index v) {
        return std::max<Index>(1, static_cast<Index>(std::llround(v * factor)));
    };
    SyntheticSpec out = *this;
    out.rows_start = mul(rows_start);
    out.cols_start = mul(cols_start);
    out.rows_end = mul(rows_end);
    out.cols_end = mul(cols_end);
    return out;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.t_total < 1) throw std::invalid_argument("generate_synthetic: t_total must be >= 1");
    if (spec.rows_start < 1 || spec.cols_start < 1 || spec.rows_end < spec.rows_start ||
        spec.cols_end < spec.cols_start)
        throw std::invalid_argument("generate_synthetic: bad size schedule");
    if (spec.rank < 1 || spec.rank > std::min(spec.rows_start, spec.cols_start))
        throw std::invalid_argument("generate_synthetic: rank must fit the smallest matrix");
    for (const double p : {spec.obs_prob_start, spec.obs_prob_end})
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument("generate_synthetic: probabilities must be in (0, 1]");
    if (spec.noise_std < 0.0)
        throw std::invalid_argument("generate_synthetic: negative noise_std");

    // One fixed underlying matrix at the final size; every snapshot
    // observes its leading block.
    Vector sigma(spec.rank);
    {
        std::mt19937_64 gen(derive_seed(spec.seed, 1));
        for (Index l = 0; l < spec.rank; ++l) sigma[l] = 1.0 - uniform01(gen);  // (0, 1]
        std::sort(sigma.data(), sigma.data() + sigma.size(), std::greater<double>());
    }
    Matrix base =
        matrix_with_spectrum(spec.rows_end, spec.cols_end, sigma, derive_seed(spec.seed, 2));
    const double mean = base.mean();
    const double sd = std::sqrt((base.array() - mean).square().mean());
    if (sd > 0.0) base /= sd;

    const Index half = (spec.t_total + 1) / 2;
    const auto size_at = [&](Index t, Index s0, Index s1) -> Index {
        if (t < half || spec.t_total == half) return s0;
        const double frac =
            static_cast<double>(t - (half - 1)) / static_cast<double>(spec.t_total - half);
        return s0 + static_cast<Index>(std::llround(frac * static_cast<double>(s1 - s0)));
    };
    const auto prob_at = [&](Index t) -> double {
        if (t >= half) return spec.obs_prob_end;
        if (half == 1) return spec.obs_prob_end;
        return spec.obs_prob_start + static_cast<double>(t) *
                                         (spec.obs_prob_end - spec.obs_prob_start) /
                                         static_cast<double>(half - 1);
    };

    SyntheticData data;
    for (Index t = 0; t < spec.t_total; ++t) {
        const Index m = size_at(t, spec.rows_start, spec.rows_end);
        const Index n = size_at(t, spec.cols_start, spec.cols_end);
        const double prob = prob_at(t);
        std::mt19937_64 gen(derive_seed(spec.seed, 100 + static_cast<std::uint64_t>(t)));
        bool have_spare = false;
        double spare = 0.0;
        const auto gaussian = [&]() {
            if (have_spare) {
                have_spare = false;
                return spare;
            }
            const double u1 = 1.0 - uniform01(gen);
            const double u2 = uniform01(gen);
            const double radius = std::sqrt(-2.0 * std::log(u1));
            spare = radius * std::sin(2.0 * M_PI * u2);
            have_spare = true;
            return radius * std::cos(2.0 * M_PI * u2);
        };
        std::vector<Triplet> train_entries;
        std::vector<Triplet> test_entries;
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < n; ++j) {
                if (uniform01(gen) >= prob) continue;
                const double value = base(i, j) + spec.noise_std * gaussian();
                auto& side = uniform01(gen) < 0.5 ? train_entries : test_entries;
                side.push_back({i, j, value});
            }
        }
        const std::string label = std::to_string(t + 1);
        data.train.matrices.emplace_back(m, n, std::move(train_entries));
        data.train.labels.push_back(label);
        data.test.matrices.emplace_back(m, n, std::move(test_entries));
        data.test.labels.push_back(label);
    }
    return data;
}

ModelSelectionResult select_model(const SparseMatrix& x, const ModelSelectionGrid& grid,
                                  const SolverConfig& config, bool center,
                                  std::uint64_t seed) {
    if (grid.rhos.empty() || grid.ks.empty())
        throw std::invalid_argument("select_model: empty grid");
    if (grid.folds < 2) throw std::invalid_argument("select_model: need at least 2 folds");
    if (grid.max_sampled_entries < grid.folds)
        throw std::invalid_argument("select_model: sample cap below fold count");
    if (x.nnz() < grid.folds)
        throw std::invalid_argument("select_model: fewer observed entries than folds");
    for (const double rho : grid.rhos)
        if (!(rho > 0.0)) throw std::invalid_argument("select_model: rhos must be positive");
    for (const Index k : grid.ks)
        if (k < 1) throw std::invalid_argument("select_model: ks must be >= 1");

    // Descending-rho order gives the strictly decreasing lambda path;
    // remember where each one lives in the caller's grid.
    std::vector<std::size_t> rho_order(grid.rhos.size());
    std::iota(rho_order.begin(), rho_order.end(), std::size_t{0});
    std::sort(rho_order.begin(), rho_order.end(), [&grid](std::size_t a, std::size_t b) {
        return grid.rhos[a] > grid.rhos[b];
    });
    for (std::size_t i = 1; i < rho_order.size(); ++i)
        if (grid.rhos[rho_order[i]] == grid.rhos[rho_order[i - 1]])
            throw std::invalid_argument("select_model: duplicate rho values");

    // Uniform entry sample, dealt round-robin into folds.
    std::vector<Index> sampled(x.nnz());
    std::iota(sampled.begin(), sampled.end(), Index{0});
    {
        std::mt19937_64 gen(derive_seed(seed, 7));
        std::shuffle(sampled.begin(), sampled.end(), gen);
    }
    if (static_cast<Index>(sampled.size()) > grid.max_sampled_entries)
        sampled.resize(grid.max_sampled_entries);

    const int folds = grid.folds;
    const int n_k = static_cast<int>(grid.ks.size());
    const int n_rho = static_cast<int>(grid.rhos.size());
    // rmse_cell[(k_idx * folds + fold) * n_rho + rho_idx]
    std::vector<double> rmse_cell(static_cast<std::size_t>(n_k) * folds * n_rho, 0.0);

#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(dynamic)
#endif
    for (int k_idx = 0; k_idx < n_k; ++k_idx) {
        for (int fold = 0; fold < folds; ++fold) {
            std::vector<Triplet> train_entries;
            std::vector<Triplet> val_entries;
            for (std::size_t e = 0; e < sampled.size(); ++e) {
                const Index at = sampled[e];
                const Triplet entry{x.rows()[at], x.cols()[at], x.values()[at]};
                if (static_cast<int>(e % folds) == fold)
                    val_entries.push_back(entry);
                else
                    train_entries.push_back(entry);
            }
            SparseMatrix train(x.n_rows(), x.n_cols(), std::move(train_entries));
            const SparseMatrix val(x.n_rows(), x.n_cols(), std::move(val_entries));
            CenteringInfo info;
            if (center) {
                auto centered = center_rows(train);
                train = std::move(centered.first);
                info = std::move(centered.second);
            }
            const double sigma1 =
                leading_singular_value(train, derive_seed(seed, 1000 + fold));
            std::vector<double> lambdas(rho_order.size());
            for (std::size_t i = 0; i < rho_order.size(); ++i)
                lambdas[i] = grid.rhos[rho_order[i]] * sigma1;
            SolverConfig cell = config;
            cell.rsvd.k = grid.ks[k_idx];
            cell.rsvd.seed = derive_seed(seed, 2000 + static_cast<std::uint64_t>(k_idx) * folds +
                                                   static_cast<std::uint64_t>(fold));
            const auto path = solve_path(train, lambdas, cell);
            for (std::size_t i = 0; i < path.size(); ++i) {
                const double err = rmse(val, path[i].z, center ? &info : nullptr);
                const std::size_t slot =
                    (static_cast<std::size_t>(k_idx) * folds + fold) * n_rho + rho_order[i];
                rmse_cell[slot] = err;
            }
        }
    }

    ModelSelectionResult result;
    result.table.assign(n_k, std::vector<double>(n_rho, 0.0));
    for (int k_idx = 0; k_idx < n_k; ++k_idx)
        for (int rho_idx = 0; rho_idx < n_rho; ++rho_idx) {
            double sum = 0.0;
            for (int fold = 0; fold < folds; ++fold)
                sum += rmse_cell[(static_cast<std::size_t>(k_idx) * folds + fold) * n_rho +
                                 rho_idx];
            result.table[k_idx][rho_idx] = sum / folds;
        }

    bool first = true;
    for (int k_idx = 0; k_idx < n_k; ++k_idx)
        for (int rho_idx = 0; rho_idx < n_rho; ++rho_idx) {
            const double err = result.table[k_idx][rho_idx];
            const bool better =
                first || err < result.cv_rmse ||
                (err == result.cv_rmse &&
                 (grid.ks[k_idx] < result.k ||
                  (grid.ks[k_idx] == result.k && grid.rhos[rho_idx] > result.rho)));
            if (better) {
                result.cv_rmse = err;
                result.k = grid.ks[k_idx];
                result.rho = grid.rhos[rho_idx];
                first = false;
            }
        }
    return result;
}

}  // namespace omc
