// SPDX-License-Identifier: Apache-2.0
#include "xtalk/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace xtalk {

namespace {

double cond_from_lu(const Eigen::PartialPivLU<CMatrix>& lu) {
    const double rc = lu.rcond();
    if (!(rc > 0.0) || !std::isfinite(rc)) return std::numeric_limits<double>::infinity();
    return 1.0 / rc;
}

}  // namespace

double condition_estimate(const CMatrix& a) {
    if (a.rows() == 0) return 1.0;
    Eigen::PartialPivLU<CMatrix> lu(a);
    return cond_from_lu(lu);
}

CMatrix solve_refined(const CMatrix& a, const CMatrix& b, std::size_t tone) {
    if (a.rows() != a.cols() || a.rows() != b.rows())
        throw Error(ErrorCode::InvalidParams, "solve_refined: dimension mismatch");
    if (!a.allFinite() || !b.allFinite())
        throw SingularChannel(tone, "non-finite system matrix");

    Eigen::PartialPivLU<CMatrix> lu(a);
    const double cond = cond_from_lu(lu);
    if (cond > kMaxConditionEstimate) {
        std::ostringstream os;
        os << "condition estimate " << cond << " exceeds " << kMaxConditionEstimate;
        if (tone != SingularChannel::kNoTone) os << " at tone " << tone;
        throw SingularChannel(tone, os.str());
    }
    CMatrix x = lu.solve(b);
    const CMatrix residual = b - a * x;
    x += lu.solve(residual);
    return x;
}

CMatrix inverse_refined(const CMatrix& a, std::size_t tone) {
    return solve_refined(a, CMatrix::Identity(a.rows(), a.cols()), tone);
}

double max_abs(const CMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace xtalk
