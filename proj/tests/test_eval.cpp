#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "omc/eval.hpp"
#include "omc/kernels.hpp"
#include "omc/rsvd.hpp"
#include "omc/soft_impute.hpp"
#include "omc/types.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <set>

using namespace omc;

TEST_CASE("rmse matches the dense oracle, with and without centering") {
    const Matrix truth = oracle::random_dense(12, 9, 1);
    const SparseMatrix observed = oracle::sample_entries(truth, 0.5, 2);
    const PartialSVD z = exact_svd(oracle::low_rank_dense(12, 9, 3, 3), 3);
    CHECK(rmse(observed, z) ==
          doctest::Approx(oracle::rmse(observed, kernels::densify(z))).epsilon(1e-12));

    CenteringInfo info;
    info.row_means = Vector::LinSpaced(12, -1.0, 1.0);
    Matrix shifted = kernels::densify(z);
    for (Index i = 0; i < 12; ++i) shifted.row(i).array() += info.row_means[i];
    CHECK(rmse(observed, z, &info) ==
          doctest::Approx(oracle::rmse(observed, shifted)).epsilon(1e-12));

    CHECK_THROWS_AS(rmse(SparseMatrix(12, 9, {}), z), std::invalid_argument);
}

TEST_CASE("subspace drift is zero within a subspace and one across orthogonal ones") {
    const Matrix basis = orthonormalize(oracle::random_dense(20, 4, 4));
    CHECK(subspace_drift(basis, basis) == doctest::Approx(0.0).epsilon(1e-12));

    // any rotation within the span leaves the drift at zero
    const Matrix rot = orthonormalize(oracle::random_dense(4, 4, 5));
    CHECK(subspace_drift(basis * rot, basis) < 1e-12);

    Matrix e1 = Matrix::Zero(6, 2), e2 = Matrix::Zero(6, 2);
    e1(0, 0) = e1(1, 1) = 1.0;
    e2(2, 0) = e2(3, 1) = 1.0;
    CHECK(subspace_drift(e1, e2) == doctest::Approx(1.0));

    const Matrix other = orthonormalize(oracle::random_dense(20, 4, 6));
    CHECK(subspace_drift(basis, other) ==
          doctest::Approx(oracle::subspace_drift(basis, other)).epsilon(1e-10));
}

TEST_CASE("sigma drift pads ranks and handles vanishing spectra") {
    Vector a(3), b(2);
    a << 3.0, 2.0, 1.0;
    b << 3.0, 2.0;
    // padded previous = [3 2 0]: squared change over squared current norm
    CHECK(sigma_drift(a, b) == doctest::Approx(1.0 / a.squaredNorm()).epsilon(1e-12));
    CHECK(sigma_drift(a, a) == 0.0);
    CHECK(sigma_drift(Vector(), Vector()) == 0.0);
    CHECK(std::isinf(sigma_drift(Vector(), a)));
}

TEST_CASE("drift_between pads shapes and applies the rank conventions") {
    const PartialSVD z = exact_svd(oracle::low_rank_dense(10, 8, 3, 7), 3);
    const DriftMeasures self = drift_between(z, z);
    CHECK(self.theta_p == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(self.theta_q == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(self.phi_sigma == doctest::Approx(0.0).epsilon(1e-12));

    const PartialSVD zero = PartialSVD::zero(10, 8);
    CHECK(drift_between(zero, z).theta_p == doctest::Approx(1.0));
    CHECK(drift_between(zero, zero).theta_p == 0.0);

    // previous lives in a smaller matrix; it is padded before comparison
    const PartialSVD small = exact_svd(oracle::low_rank_dense(6, 5, 3, 8), 3);
    const DriftMeasures grown = drift_between(small, z);
    CHECK(grown.theta_p >= 0.0);
    CHECK(grown.theta_p <= 1.0);
}

TEST_CASE("row centering removes observed row means and mirrors onto test data") {
    std::vector<Triplet> entries = {
        {0, 0, 4.0}, {0, 2, 6.0}, {1, 1, -2.0}, {2, 0, 1.0}, {2, 1, 2.0}, {2, 2, 3.0}};
    const SparseMatrix train(4, 3, std::move(entries));
    const auto [centered, info] = center_rows(train);
    REQUIRE(info.row_means.size() == 4);
    CHECK(info.row_means[0] == doctest::Approx(5.0));
    CHECK(info.row_means[1] == doctest::Approx(-2.0));
    CHECK(info.row_means[2] == doctest::Approx(2.0));
    CHECK(info.row_means[3] == 0.0);  // unobserved row keeps mean zero

    Vector row_sums = Vector::Zero(4);
    for (Index e = 0; e < centered.nnz(); ++e) row_sums[centered.rows()[e]] += centered.values()[e];
    CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-12);

    const SparseMatrix test(4, 3, {{0, 1, 7.0}, {3, 0, 1.5}});
    const SparseMatrix shifted = apply_centering(test, info);
    CHECK(shifted.values()[0] == doctest::Approx(2.0));
    CHECK(shifted.values()[1] == doctest::Approx(1.5));

    const std::vector<Index> rows = {0, 3};
    Vector values(2);
    values << 2.0, 1.5;
    const Vector restored = uncenter(values, rows, info);
    CHECK(restored[0] == doctest::Approx(7.0));
    CHECK(restored[1] == doctest::Approx(1.5));
}

TEST_CASE("sigma refit never hurts the training fit") {
    const Matrix truth = oracle::low_rank_dense(30, 20, 4, 9);
    const SparseMatrix x = oracle::sample_entries(truth, 0.5, 10);
    SolverConfig config;
    const double lambda = 0.3 * leading_singular_value(x, 11);
    const CompletionSolution sol = solve(x, lambda, PartialSVD::zero(30, 20), config);
    REQUIRE(sol.z.rank() > 0);

    const PartialSVD refit = postprocess_sigma(x, sol.z);
    const double before = kernels::residual_on_omega(x, sol.z).squared_norm();
    const double after = kernels::residual_on_omega(x, refit).squared_norm();
    CHECK(after <= before + 1e-9);
    CHECK(refit.is_orthonormal());
    // shrinkage bias shrinks sigma; the refit moves it back up
    CHECK(refit.sigma().sum() >= sol.z.sigma().sum() - 1e-9);
}

TEST_CASE("sigma refit requires a nonzero factorization") {
    const SparseMatrix x(5, 4, {{0, 0, 1.0}});
    CHECK_THROWS_AS(postprocess_sigma(x, PartialSVD::zero(5, 4)), std::invalid_argument);
}

TEST_CASE("synthetic generator follows the published size and density schedule") {
    SyntheticSpec spec;
    spec = spec.scaled(0.02);
    spec.rank = 3;
    spec.seed = 12;
    const SyntheticData data = generate_synthetic(spec);
    REQUIRE(data.train.matrices.size() == 20);
    REQUIRE(data.test.matrices.size() == 20);

    // first half fixed at the starting size, second half grows linearly
    for (int t = 0; t < 10; ++t) {
        CHECK(data.train.matrices[t].n_rows() == 100);
        CHECK(data.train.matrices[t].n_cols() == 20);
    }
    CHECK(data.train.matrices[19].n_rows() == 200);
    CHECK(data.train.matrices[19].n_cols() == 30);
    for (int t = 11; t < 20; ++t) {
        CHECK(data.train.matrices[t].n_rows() >= data.train.matrices[t - 1].n_rows());
        CHECK(data.train.matrices[t].n_cols() >= data.train.matrices[t - 1].n_cols());
    }

    // density climbs over the first half, then holds
    const auto density = [&data](int t) {
        const auto& train = data.train.matrices[t];
        const auto& test = data.test.matrices[t];
        return double(train.nnz() + test.nnz()) / double(train.n_rows() * train.n_cols());
    };
    CHECK(density(0) == doctest::Approx(0.03).epsilon(0.8));
    CHECK(density(9) > density(0));
    CHECK(density(15) == doctest::Approx(0.10).epsilon(0.4));

    // train and test are disjoint
    for (int t : {0, 19}) {
        std::set<std::pair<Index, Index>> seen;
        const auto& train = data.train.matrices[t];
        for (Index e = 0; e < train.nnz(); ++e)
            seen.insert({train.rows()[e], train.cols()[e]});
        const auto& test = data.test.matrices[t];
        for (Index e = 0; e < test.nnz(); ++e)
            CHECK(seen.count({test.rows()[e], test.cols()[e]}) == 0);
    }

    // same spec, same data
    const SyntheticData again = generate_synthetic(spec);
    CHECK(again.train.matrices[5].nnz() == data.train.matrices[5].nnz());
    bool same = true;
    for (Index e = 0; e < again.train.matrices[5].nnz(); ++e)
        same = same && again.train.matrices[5].values()[e] == data.train.matrices[5].values()[e];
    CHECK(same);
}

TEST_CASE("synthetic values are normalized to entry scale one") {
    SyntheticSpec spec;
    spec = spec.scaled(0.05);
    spec.rank = 5;
    spec.seed = 13;
    const SyntheticData data = generate_synthetic(spec);
    double sum = 0.0, sum2 = 0.0;
    Index count = 0;
    for (const auto& x : data.train.matrices) {
        for (const double v : x.values()) {
            sum += v;
            sum2 += v * v;
            ++count;
        }
    }
    const double mean = sum / double(count);
    const double std = std::sqrt(sum2 / double(count) - mean * mean);
    CHECK(std == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("model selection scores every grid cell and picks the argmin") {
    const Matrix truth = oracle::low_rank_dense(60, 30, 2, 14);
    const SparseMatrix x = oracle::sample_entries(truth, 0.5, 15);
    ModelSelectionGrid grid;
    grid.rhos = {0.05, 0.2, 0.4};
    grid.ks = {2, 6};
    grid.folds = 3;
    SolverConfig config;
    config.backend = SvdBackend::randomized_seeded;
    config.rsvd.p = 4;
    config.rsvd.q = 1;
    const ModelSelectionResult result = select_model(x, grid, config, false, 16);

    REQUIRE(result.table.size() == 2);
    REQUIRE(result.table[0].size() == 3);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : result.table)
        for (const double cell : row) {
            CHECK(std::isfinite(cell));
            best = std::min(best, cell);
        }
    CHECK(result.cv_rmse == best);
    // the winning pair indexes its own table cell
    const auto ki = std::find(grid.ks.begin(), grid.ks.end(), result.k) - grid.ks.begin();
    const auto ri = std::find(grid.rhos.begin(), grid.rhos.end(), result.rho) - grid.rhos.begin();
    CHECK(result.table[ki][ri] == result.cv_rmse);
    // an easy rank-2 instance should prefer the small rank and light shrinkage
    CHECK(result.k == 2);
}

TEST_CASE("model selection validates its grid") {
    const SparseMatrix x = oracle::sample_entries(oracle::random_dense(10, 8, 17), 0.8, 18);
    SolverConfig config;
    ModelSelectionGrid grid;
    grid.rhos = {};
    CHECK_THROWS_AS(select_model(x, grid, config, false, 0), std::invalid_argument);
    grid = ModelSelectionGrid{};
    grid.folds = 1;
    CHECK_THROWS_AS(select_model(x, grid, config, false, 0), std::invalid_argument);
    grid = ModelSelectionGrid{};
    grid.rhos = {0.1, 0.1};
    CHECK_THROWS_AS(select_model(x, grid, config, false, 0), std::invalid_argument);
    grid = ModelSelectionGrid{};
    grid.rhos = {-0.1, 0.2};
    CHECK_THROWS_AS(select_model(x, grid, config, false, 0), std::invalid_argument);
}

TEST_CASE("model selection results do not depend on the thread count") {
#ifdef _OPENMP
    const Matrix truth = oracle::low_rank_dense(40, 24, 3, 19);
    const SparseMatrix x = oracle::sample_entries(truth, 0.5, 20);
    ModelSelectionGrid grid;
    grid.rhos = {0.1, 0.3};
    grid.ks = {3, 5};
    grid.folds = 2;
    SolverConfig config;
    omp_set_num_threads(1);
    const ModelSelectionResult one = select_model(x, grid, config, true, 21);
    omp_set_num_threads(4);
    const ModelSelectionResult four = select_model(x, grid, config, true, 21);
    omp_set_num_threads(omp_get_num_procs());
    CHECK(one.k == four.k);
    CHECK(one.rho == four.rho);
    for (std::size_t i = 0; i < one.table.size(); ++i)
        for (std::size_t j = 0; j < one.table[i].size(); ++j)
            CHECK(one.table[i][j] == doctest::Approx(four.table[i][j]).epsilon(1e-12));
#endif
}
