// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "xtalk/channel_model.hpp"
#include "xtalk/linalg.hpp"

namespace xtalk {

double db_to_linear(double db);
double linear_to_db(double linear);

/// Transmit and noise power spectral densities plus the Shannon gap.
/// psd_dbm_hz holds one value per user, or a single value shared by all users.
/// psd_table_dbm_hz, when non-empty, overrides it per tone: [tone][user].
struct LinkBudget {
    std::vector<double> psd_dbm_hz{-60.0};
    std::vector<std::vector<double>> psd_table_dbm_hz;
    double noise_psd_dbm_hz = -140.0;
    double gamma_gap_db = 10.7;
    ToneGrid grid;

    /// Throws InvalidBudget on a negative gap, a non-finite PSD or a
    /// nonpositive linear noise PSD; `users` is checked against the PSD shapes.
    void validate(int users) const;

    double gap() const { return db_to_linear(gamma_gap_db); }
    double noise_linear() const { return db_to_linear(noise_psd_dbm_hz); }
    double psd_linear(int user, std::size_t tone) const;

    /// P_i |d_ii|^2 / sigma^2 at this tone.
    double snr(const ChannelSnapshot& snapshot, int user, std::size_t tone) const;
    Eigen::VectorXd snr_vector(const ChannelSnapshot& snapshot, std::size_t tone) const;

    /// P_j / P_i for every j at this tone (entry i is 1).
    Eigen::VectorXd psd_weights(int users, int user, std::size_t tone) const;

    /// max_{j != i} P_j / P_i.
    double max_psd_ratio(int users, int user, std::size_t tone) const;

    /// max_j P_j / min_j P_j: the PSD dynamic range (1 for equal PSDs).
    double psd_dynamic_range(int users, std::size_t tone) const;

    /// True when every user has the same PSD on every tone.
    bool equal_psd() const;

    bool operator==(const LinkBudget&) const = default;
};

/// log2(1 + SNR / gap) from an already computed SNR.
double rate_from_snr(double snr, double gap);

/// log2(1 + SNR_i(f) / gap): the rate with crosstalk removed.
double rate_ideal(const LinkBudget& budget, const ChannelSnapshot& snapshot, int user,
                  std::size_t tone = 0);

struct ToneLoss {
    double rate = 0.0;            ///< R_i(f)
    double rate_perturbed = 0.0;  ///< R_i(f) - L_i(f)
    double loss = 0.0;            ///< L_i(f), signed
    double a = 0.0;
    double q = 0.0;
    double k = 0.0;
    double delta_norm = 0.0;  ///< gap * sum_{j != i} (P_j / P_i) |Delta_ij|^2
};

/// Loss from its sufficient statistics: snr, gap, the weighted off-diagonal
/// energy s = sum_{j != i} (P_j / P_i)|Delta_ij|^2 and Delta_ii.
ToneLoss loss_from_terms(double snr, double gap, double weighted_offdiag, cplx delta_ii);

/// Exact rate loss of `user` on one tone for the equivalent perturbation Delta.
ToneLoss loss_exact(const LinkBudget& budget, const ChannelSnapshot& snapshot, const CMatrix& delta,
                    int user, std::size_t tone = 0);

struct BandLoss {
    double rate = 0.0;  ///< bits/s, rectangle rule
    double loss = 0.0;  ///< bits/s
    std::optional<double> eta;  ///< loss / rate; empty when rate == 0 (RelativeLossUndefined)
};

struct LossReport {
    std::vector<std::vector<ToneLoss>> per_tone;  ///< [user][tone]
    std::vector<BandLoss> band;                   ///< [user]
};

/// Rectangle-rule band totals for one user; deltas holds one matrix per tone.
BandLoss loss_band(const LinkBudget& budget, const ChannelEnsemble& ensemble,
                   const std::vector<CMatrix>& deltas, int user);

/// Per-tone and band losses for every user.
LossReport analyze_losses(const LinkBudget& budget, const ChannelEnsemble& ensemble,
                          const std::vector<CMatrix>& deltas);

/// Band totals from per-tone records.
BandLoss integrate(const std::vector<ToneLoss>& tones, double spacing);

}  // namespace xtalk
