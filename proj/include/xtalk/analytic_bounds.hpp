// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "xtalk/channel_model.hpp"
#include "xtalk/rate_analysis.hpp"

namespace xtalk {

/// Per-tone inputs to the closed-form loss bounds.
struct BoundInputs {
    int p = 2;
    double r = 0.0;        ///< r(H(f)), or r_max for band use
    double d = 14.0;       ///< word length in bits
    double snr = 0.0;      ///< SNR_i(f), linear
    double rho = 1.0;      ///< PSD dynamic range max_j P_j / P_i (1 for equal PSDs)
    double m_ratio = 1.0;  ///< max_{j != i} P_j / P_i
    double t = 0.0;        ///< max_j |Delta_ij| for the general bound

    /// Throws InvalidParams unless rho >= 1, m_ratio >= 0, t >= 0, r >= 0,
    /// snr >= 0, p >= 2, all finite.
    void validate() const;
};

/// log2((1 + (p-1) M t^2 SNR) / (1-t)^2). Throws BoundInapplicable if t >= 1.
double bound_general_per_tone(const BoundInputs& in);

/// Smallest admissible word length of the main bound: 1/2 + log2(1 + r).
double main_bound_floor(double r);

/// gamma(d, f) = 2 rho (p-1) (1+r)^2 2^{-2d}.
double gamma_coefficient(int p, double r, double d, double rho = 1.0);

/// log2(1 + gamma SNR) - 2 log2(1 - sqrt2 (1+r) 2^{-d}). rho > 1 gives the
/// unequal-PSD form. Throws BitDepthTooSmall when d < main_bound_floor(r);
/// returns +inf exactly at the floor.
double bound_main_per_tone(const BoundInputs& in);

/// Band inputs: per-tone SNR of one user on a rectangle-rule grid.
struct BandBoundInputs {
    int p = 2;
    double r_max = 0.0;
    double d = 14.0;
    std::vector<double> snr;
    double spacing = kDmtToneSpacing;
    double rho = 1.0;
};

/// sum_k log2(1 + gamma(d) SNR_k) spacing - 2 |B| log2(1 - (1 + r_max) 2^{-d + 1/2}),
/// |B| = count * spacing. Same precondition as the per-tone bound.
double bound_main_band(const BandBoundInputs& in);

/// 2^{-d + 3.5} + log2(1 + 8 (p-1) SNR 2^{-2d}). Requires r <= 1 and
/// sqrt2 (1+r) 2^{-d} <= 1/2, otherwise BoundInapplicable.
double bound_simplified_per_tone(const BoundInputs& in);

/// lim_{d -> inf} bound_main_band(d) 2^d = 2 sqrt2 (1 + r_max) |B| / ln 2.
double bound_asymptotic_coefficient(double r_max, double band);

/// Inputs for the Werner-profile band bounds. decay is the exponent of the
/// power SNR profile SNR(f) = snr0 exp(-decay sqrt f); with the amplitude
/// insertion loss exp(-alpha ell sqrt f) this is decay = 2 alpha ell.
struct WernerBoundParams {
    double alpha_ell = 0.0019;
    double gamma1 = 0.1596;
    double gamma2 = 3.1729e-8;
    int p = 10;
    double snr0 = 1e8;     ///< P / sigma^2 at f = 0
    double band = 30e6;    ///< B in Hz (band is [0, B])
    double gap = 1.0;      ///< Shannon gap, linear

    // Derived by derive():
    double rho_ell = 0.0;
    double xi_ell = 0.0;
    double c = 0.0;        ///< spectral-efficiency floor; <= 0 leaves zeta NaN
    double zeta_ell = 0.0;

    double decay() const { return 2.0 * alpha_ell; }

    /// Fills rho_ell, xi_ell, c and zeta_ell. Throws InvalidParams for
    /// alpha_ell <= 0, negative gamma, band <= 0, snr0 <= 0 or p < 2.
    WernerBoundParams& derive();
};

/// Builds derived Werner bound parameters from the channel fit and budget
/// (equal PSD assumed; user 0's PSD is used).
WernerBoundParams make_werner_bound_params(double alpha_ell, const RowDominanceFit& fit, int p,
                                           const LinkBudget& budget, double band);

/// (1+g1)^2 + 12 (1+g1) g2 / decay^2 + 240 (g2 / decay^2)^2.
double rho_ell(double gamma1, double gamma2, double decay);

/// xi 2^{-2d} + 2^{-d + 3.5}: bound on the band-average loss L_i(d) / B.
double bound_werner_decay(const WernerBoundParams& w, double d);

/// (1/3) log2(SNR/gap) + (2/3) log2(SNR'/gap) with SNR' = SNR exp(-decay sqrt B).
double spectral_floor_from_edges(double snr_low_over_gap, double snr_high_over_gap);
double spectral_floor(double snr0, double gap, double decay, double band);
/// Equivalent form log2(SNR/gap) - (2/3) decay sqrt(B) log2(e).
double spectral_floor_direct(double snr0, double gap, double decay, double band);

/// Floor for `user` of a budget on a Werner channel with aggregate amplitude
/// exponent alpha_ell over [0, budget.grid.f_end]. Throws FloorNonpositive if <= 0.
double spectral_efficiency_floor(const LinkBudget& budget, double alpha_ell, int user);

/// zeta 2^{-2d} + (1/c) 2^{-d + 3.5}: bound on the relative loss eta_i(d).
/// Throws FloorNonpositive when c <= 0.
double bound_relative(const WernerBoundParams& w, double d);

/// max over [0, B] of (a + b x)^2 snr0 exp(-alpha sqrt x).
double j_integral_peak(double a, double b, double alpha, double band, double snr0);

/// min( e^{alpha sqrt B} / (alpha^2 B) (2a^2 + 24ab/alpha^2 + 240 (b/alpha^2)^2)
///      log2(1 + mu f(B)),  log2(1 + M mu) ),  f(x) = snr0 exp(-alpha sqrt x),
/// bounding J(mu) = (1/B) int_0^B log2(1 + mu (a + b x)^2 f(x)) dx.
double j_integral_bound(double a, double b, double alpha, double band, double snr0, double mu);

// Convenience evaluators on channel data.

/// Per-tone main bound of `user` at tone k with r, SNR and rho from the data.
double main_bound_at_tone(const LinkBudget& budget, const ChannelSnapshot& snapshot, int user,
                          std::size_t tone, double d);

/// Band main bound of `user` with r_max and rho maximized over the ensemble.
double main_bound_band(const LinkBudget& budget, const ChannelEnsemble& ensemble, int user, double d);

}  // namespace xtalk
