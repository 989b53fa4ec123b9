#pragma once

#include "omc/types.hpp"

namespace omc {

/// Inputs shared by the closed-form error bounds. sigma_tail holds the
/// singular values past position k (sigma_{k+1} .. sigma_r), nonincreasing.
struct BoundInputs {
    Index m = 0;
    Index n = 0;
    Index k = 0;
    Index p = 0;
    Index q = 0;
    double lambda = 0.0;
    Vector sigma_tail;
};

// (sum |v_i|^s)^(1/s), the vector s-norm; the bounds use s = 2q+1.
double tail_s_norm(const Vector& tail, double s);

// The spectral bound is printed under the hypothesis p == k; evaluators
// accept other p but callers should surface this flag when it is false.
bool spectral_hypothesis_holds(const BoundInputs& in);

/// Expected spectral error of the width-(k+p) power-scheme factorization:
/// [1 + 4 sqrt(2 min(m,n)/(k-1))]^(1/(2q+1)) * sigma_{k+1}.
/// Requires k >= 2. An empty tail means sigma_{k+1} = 0.
double spectral_bound(const BoundInputs& in);

/// Expected squared Frobenius residual of the range projection:
/// (k+p) * (1 + k/(p-1))^(1/(2q+1)) * ||tail||_(2q+1). Requires p >= 2.
double frobenius_power_bound(const BoundInputs& in);

/// Expected gap between the exactly- and approximately-shrunk objectives:
///   lambda k (1+theta) sigma_{k+1} + 1/2 ||tail||_2^2
///     + k (1 + k/(k-1))^(1/(2q+1)) ||tail||_(2q+1)
/// with theta the full bracket of spectral_bound. Requires k >= 2; the
/// sigma_tail entries are singular values of the iterate being shrunk.
double objective_gap_bound(const BoundInputs& in);

/// Both sides of the power-scheme norm inequality, evaluated densely on a
/// small instance. With B = (A A^T)^q A and P the projector onto the range
/// of B * omega_block:
///   spectral:   ||(I-P)A||_2 <= ||(I-P)B||_2^(1/(2q+1))
///   Frobenius:  ||(I-P)A||_F <= sqrt(l) * ||(I-P)B||_2^(1/(2q+1))
/// where l is the width of omega_block.
struct PowerSchemeSides {
    double spectral_lhs = 0.0;
    double spectral_rhs = 0.0;
    double frobenius_lhs = 0.0;
    double frobenius_rhs = 0.0;
};
PowerSchemeSides power_scheme_check(const Matrix& a, const Matrix& omega_block, Index q);

}  // namespace omc
