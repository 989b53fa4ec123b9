// Timing comparison between the serial reference kernels and their
// OpenMP counterparts on sparse-plus-low-rank operands of growing size.
// Run with OMP_NUM_THREADS set to the thread count under test.

#include "omc/kernels.hpp"
#include "omc/rsvd.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

using namespace omc;

namespace {

double uniform(std::mt19937_64& gen) { return (gen() >> 11) * 0x1.0p-53; }

SparsePlusLowRank make_operand(Index m, Index n, Index rank, double density,
                               std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<Triplet> entries;
    std::normal_distribution<double> normal;
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j)
            if (uniform(gen) < density) entries.push_back({i, j, normal(gen)});
    const Matrix p = orthonormalize(gaussian_block(m, rank, seed + 1));
    const Matrix q = orthonormalize(gaussian_block(n, rank, seed + 2));
    Vector sigma(rank);
    for (Index i = 0; i < rank; ++i) sigma[i] = double(rank - i);
    return SparsePlusLowRank(SparseMatrix(m, n, std::move(entries)),
                             PartialSVD(p, sigma, q));
}

// best of `reps` runs, in seconds
double time_best(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        best = std::min(best, s);
    }
    return best;
}

void row(const char* kernel, Index m, Index n, double serial_s, double parallel_s) {
    std::printf("%-18s %6lld x %-6lld %12.3f %14.3f %9.2fx\n", kernel, (long long)m,
                (long long)n, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
    const Index block_width = 24;
    const Index rank = 32;
    const double density = 0.05;

    std::printf("threads: %d, block width: %lld, rank: %lld, density: %.2f, best of %d\n",
                omp_get_max_threads(), (long long)block_width, (long long)rank, density,
                reps);
    std::printf("%-18s %8s %-8s %12s %14s %9s\n", "kernel", "rows", "cols", "serial ms",
                "parallel ms", "speedup");

    const struct {
        Index m, n;
    } sizes[] = {{2000, 500}, {8000, 1000}, {20000, 2000}};

    for (const auto& size : sizes) {
        const SparsePlusLowRank a = make_operand(size.m, size.n, rank, density, 17);
        const Matrix right = gaussian_block(size.n, block_width, 23);
        const Matrix left = gaussian_block(size.m, block_width, 29);

        Matrix sink;  // keep results alive so the calls are not optimized out
        const double mul_serial =
            time_best(reps, [&] { sink = kernels::serial::multiply(a, right); });
        const double mul_parallel =
            time_best(reps, [&] { sink = kernels::multiply(a, right); });
        row("multiply", size.m, size.n, mul_serial, mul_parallel);

        const double mult_serial =
            time_best(reps, [&] { sink = kernels::serial::multiply_t(a, left); });
        const double mult_parallel =
            time_best(reps, [&] { sink = kernels::multiply_t(a, left); });
        row("multiply_t", size.m, size.n, mult_serial, mult_parallel);

        const std::span<const Index> rows = a.sparse.rows();
        const std::span<const Index> cols = a.sparse.cols();
        Vector vsink;
        const double proj_serial = time_best(
            reps, [&] { vsink = kernels::serial::project_values(a.lowrank, rows, cols); });
        const double proj_parallel = time_best(
            reps, [&] { vsink = kernels::project_values(a.lowrank, rows, cols); });
        row("project_values", size.m, size.n, proj_serial, proj_parallel);
    }
    return 0;
}
