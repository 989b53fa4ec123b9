#include "omc/bounds.hpp"

#include "omc/rsvd.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace omc {

namespace {

double head_of_tail(const Vector& tail) { return tail.size() > 0 ? tail[0] : 0.0; }

// theta = [1 + 4 sqrt(2 min(m,n)/(k-1))]^(1/(2q+1)); shared by the
// spectral and objective-gap bounds.
double spectral_factor(const BoundInputs& in) {
    const double bracket =
        1.0 + 4.0 * std::sqrt(2.0 * static_cast<double>(std::min(in.m, in.n)) /
                              static_cast<double>(in.k - 1));
    return std::pow(bracket, 1.0 / static_cast<double>(2 * in.q + 1));
}

double spectral_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::BDCSVD<Matrix>(a).singularValues()(0);
}

}  // namespace

double tail_s_norm(const Vector& tail, double s) {
    if (s < 1.0) throw std::invalid_argument("tail_s_norm: s must be >= 1");
    if (tail.size() == 0) return 0.0;
    double sum = 0.0;
    for (Index i = 0; i < tail.size(); ++i) sum += std::pow(std::abs(tail[i]), s);
    return std::pow(sum, 1.0 / s);
}

bool spectral_hypothesis_holds(const BoundInputs& in) { return in.p == in.k; }

double spectral_bound(const BoundInputs& in) {
    if (in.k < 2) throw std::invalid_argument("spectral_bound: k must be >= 2");
    if (in.q < 0) throw std::invalid_argument("spectral_bound: q must be >= 0");
    return spectral_factor(in) * head_of_tail(in.sigma_tail);
}

double frobenius_power_bound(const BoundInputs& in) {
    if (in.p < 2) throw std::invalid_argument("frobenius_power_bound: p must be >= 2");
    if (in.q < 0) throw std::invalid_argument("frobenius_power_bound: q must be >= 0");
    const double s = static_cast<double>(2 * in.q + 1);
    const double growth =
        std::pow(1.0 + static_cast<double>(in.k) / static_cast<double>(in.p - 1), 1.0 / s);
    return static_cast<double>(in.k + in.p) * growth * tail_s_norm(in.sigma_tail, s);
}

double objective_gap_bound(const BoundInputs& in) {
    if (in.k < 2) throw std::invalid_argument("objective_gap_bound: k must be >= 2");
    if (in.q < 0) throw std::invalid_argument("objective_gap_bound: q must be >= 0");
    const double k = static_cast<double>(in.k);
    const double s = static_cast<double>(2 * in.q + 1);
    const double theta = spectral_factor(in);
    const double first = in.lambda * k * (1.0 + theta) * head_of_tail(in.sigma_tail);
    const double second = 0.5 * in.sigma_tail.squaredNorm();
    const double third =
        k * std::pow(1.0 + k / (k - 1.0), 1.0 / s) * tail_s_norm(in.sigma_tail, s);
    return first + second + third;
}

PowerSchemeSides power_scheme_check(const Matrix& a, const Matrix& omega_block, Index q) {
    if (a.cols() != omega_block.rows())
        throw std::invalid_argument("power_scheme_check: omega_block row count must match a");
    if (q < 0) throw std::invalid_argument("power_scheme_check: q must be >= 0");
    Matrix b = a;
    for (Index it = 0; it < q; ++it) b = a * (a.transpose() * b);
    const Matrix basis = orthonormalize(b * omega_block);
    // residual = (I - P) M computed without forming the m x m projector
    const auto residual = [&basis](const Matrix& m) -> Matrix {
        if (basis.cols() == 0) return m;
        return m - basis * (basis.transpose() * m);
    };
    const Matrix ra = residual(a);
    const double rb_spectral = spectral_norm(residual(b));
    const double root = std::pow(rb_spectral, 1.0 / static_cast<double>(2 * q + 1));
    PowerSchemeSides sides;
    sides.spectral_lhs = spectral_norm(ra);
    sides.spectral_rhs = root;
    sides.frobenius_lhs = ra.norm();
    sides.frobenius_rhs = std::sqrt(static_cast<double>(omega_block.cols())) * root;
    return sides;
}

}  // namespace omc
