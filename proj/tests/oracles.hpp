// SPDX-License-Identifier: Apache-2.0
// Independent reference computations used as test oracles.
#pragma once

#include <cmath>

#include "xtalk/linalg.hpp"

namespace xtalk::test {

/// Loss by rate differencing from the received-signal model
///   x_i = d_ii (1 + Delta_ii) s_i + d_ii sum_{j != i} Delta_ij s_j + n_i
/// with explicit powers: signal P_i |d_ii|^2 |1 + Delta_ii|^2, interference
/// sum_j P_j |d_ii|^2 |Delta_ij|^2, noise sigma^2, all Gaussian.
inline double loss_by_differencing(const CVector& d, const CMatrix& delta, const Eigen::VectorXd& psd,
                                   double noise, double gap, int i) {
    const double g = std::norm(d(i));
    double interference = 0.0;
    for (Eigen::Index j = 0; j < delta.cols(); ++j)
        if (j != i) interference += psd(j) * g * std::norm(delta(i, j));
    const double signal_clean = psd(i) * g;
    const double signal = signal_clean * std::norm(1.0 + delta(i, i));
    const double r_clean = std::log2(1.0 + signal_clean / (gap * noise));
    const double r_pert = std::log2(1.0 + signal / (gap * (interference + noise)));
    return r_clean - r_pert;
}

/// Same loss from the full perturbed system G = H P~: SINR of user i is
/// P_i |G_ii|^2 / (sum_{j != i} P_j |G_ij|^2 + sigma^2), referenced against
/// the ideal P_i |H_ii|^2 / sigma^2.
inline double loss_from_system(const CMatrix& h, const CMatrix& p_tilde, const Eigen::VectorXd& psd,
                               double noise, double gap, int i) {
    const CMatrix g = h * p_tilde;
    double interference = 0.0;
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        if (j != i) interference += psd(j) * std::norm(g(i, j));
    const double r_clean = std::log2(1.0 + psd(i) * std::norm(h(i, i)) / (gap * noise));
    const double r_pert = std::log2(1.0 + psd(i) * std::norm(g(i, i)) / (gap * (interference + noise)));
    return r_clean - r_pert;
}

}  // namespace xtalk::test
