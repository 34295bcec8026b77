// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "xtalk/errors.hpp"

namespace xtalk {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Condition-number ceiling above which a system is refused as singular.
inline constexpr double kMaxConditionEstimate = 1e12;

/// Relative tolerance used by every residual self-check in the library.
inline constexpr double kResidualTolerance = 1e-10;

/// Solves A X = B by LU with partial pivoting followed by one step of
/// iterative refinement. Throws SingularChannel (tagged with `tone`) when the
/// reciprocal condition estimate says cond(A) > kMaxConditionEstimate.
CMatrix solve_refined(const CMatrix& a, const CMatrix& b,
                      std::size_t tone = SingularChannel::kNoTone);

/// A^{-1} via solve_refined(A, I).
CMatrix inverse_refined(const CMatrix& a, std::size_t tone = SingularChannel::kNoTone);

/// Estimated 1-norm condition number of A (infinity when singular).
double condition_estimate(const CMatrix& a);

double max_abs(const CMatrix& m);

}  // namespace xtalk
