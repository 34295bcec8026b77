// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xtalk/precoding.hpp"
#include "xtalk/rate_analysis.hpp"

namespace xtalk {

enum class Statistic { WorstCase, Mean, Quantile };

struct TrialConfig {
    int n_trials = 1000;
    /// d_bits, seed and e2_model are used; csi_samples is ignored here (pass a
    /// CsiErrorModel instead). UniformRandom is the protocol; DeterministicRounding
    /// makes every trial share the rounding error of the ideal precoder. A precoder
    /// with components outside [-1, 1] is scaled into range first and the error
    /// referred back, E2 / scale, which can exceed 2^{-d} slightly.
    PerturbationSpec spec = [] {
        PerturbationSpec s;
        s.e2_model = E2Model::UniformRandom;
        return s;
    }();
    std::vector<int> users;  ///< empty means all users
    Statistic statistic = Statistic::WorstCase;
    double quantile = 0.99;
    bool skip_failures = false;  ///< drop failing trials instead of aborting
    bool zero_errors = false;    ///< force E1 = E2 = 0 (plumbing check)

    void validate() const;
    bool operator==(const TrialConfig&) const = default;
};

struct CsiErrorModel {
    int n_samples = 1000;  ///< samples used to estimate the channel

    void validate() const;
};

/// Statistic of the trials at one word length.
struct CurvePoint {
    int d_bits = 0;
    /// per_tone[u][k]: statistic over trials of the loss of users[u] at tone k.
    /// For WorstCase and Quantile every field comes from the selected trial; for
    /// Mean only loss and rate_perturbed are averaged and a, q, k, delta_norm are NaN.
    /// band[u] integrates per_tone[u] (statistic per bin, then integrate).
    LossReport report;
    /// band_trials[u]: statistic over trials of the band-integrated loss.
    std::vector<BandLoss> band_trials;
};

struct TrialResult {
    std::vector<int> users;
    std::size_t trials_used = 0;
    std::vector<std::string> skipped;  ///< one message per dropped trial
    std::vector<CurvePoint> points;    ///< one per requested word length

    const CurvePoint& at(int d_bits) const;
};

/// Runs config.n_trials random perturbations at every word length in d_values.
/// The uniform draws are shared across word lengths: trial t uses
/// E2 = 2^{-d} U_t, with U_t fixed by (seed, tone, t). With a CSI model, E1 is
/// a Gaussian draw per (tone, trial) shared across d as well. A singular
/// perturbed channel is redrawn up to kCsiRetryCap times.
TrialResult run_trial_curve(const ChannelEnsemble& ensemble, const LinkBudget& budget,
                            const TrialConfig& config, const std::vector<int>& d_values,
                            const std::optional<CsiErrorModel>& csi = std::nullopt);

/// Quantization-only trials at config.spec.d_bits.
TrialResult run_trials(const ChannelEnsemble& ensemble, const LinkBudget& budget,
                       const TrialConfig& config);

/// Joint estimation and quantization trials at config.spec.d_bits.
TrialResult run_trials_with_csi_error(const ChannelEnsemble& ensemble, const LinkBudget& budget,
                                      const TrialConfig& config, const CsiErrorModel& csi);

inline constexpr int kCsiRetryCap = 8;
inline constexpr int kMaxEmpiricalBits = 32;

/// Smallest d in [1, 32] such that for every d' >= d the largest relative
/// loss (statistic per bin, integrated, worst over the selected users) is at
/// most target_eta. Throws TargetUnreachable if even d = 32 fails.
int min_bits_empirical(const ChannelEnsemble& ensemble, const LinkBudget& budget,
                       const TrialConfig& config, double target_eta);

/// Largest relative loss over the users of a curve point (per-bin statistic,
/// then integrated). Users with zero rate are skipped.
double worst_relative_loss(const CurvePoint& point);

}  // namespace xtalk
