// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "xtalk/linalg.hpp"

namespace xtalk {

/// Uniform tone grid. Tone k sits at f_start + k * spacing; the grid holds
/// floor((f_end - f_start) / spacing) + 1 tones.
struct ToneGrid {
    double f_start = 0.0;
    double f_end = 30e6;
    double spacing = 4312.5;

    /// Throws InvalidParams unless f_start >= 0, f_end > f_start, spacing > 0.
    void validate() const;

    std::size_t count() const;
    double freq(std::size_t k) const { return f_start + static_cast<double>(k) * spacing; }

    /// Bandwidth represented by the grid under the rectangle rule: count * spacing.
    double width() const { return static_cast<double>(count()) * spacing; }

    /// Same band, every `factor`-th tone.
    ToneGrid decimated(std::size_t factor) const;

    /// Grid with exactly n tones spanning [f_start, f_end] (n >= 2), or a
    /// single tone at f_start when n == 1.
    static ToneGrid with_count(double f_start, double f_end, std::size_t n);

    /// A one-tone grid at frequency f (spacing is the bin width).
    static ToneGrid single(double f, double bin_width = 4312.5);

    bool operator==(const ToneGrid&) const = default;
};

/// Standard DMT tone spacing in Hz.
inline constexpr double kDmtToneSpacing = 4312.5;

/// Werner-style binder model. The insertion-loss amplitude is
/// exp(-alpha * loop_length * sqrt(f)); FEXT power is K * f^2 * |IL|^2 with K
/// log-normal, mean k_mean_slope * loop_length and log-std k_sigma_log.
struct WernerParams {
    double alpha = 0.0019 / 300.0;  ///< amplitude attenuation per sqrt(Hz) per meter
    double loop_length_m = 300.0;
    double k_mean_slope = 6.012984884846838e-20;  ///< E[K] per meter of loop
    double k_sigma_log = 0.5;
    int p = 10;

    /// alpha * loop_length: the single exponent fitted from measured insertion losses.
    double alpha_ell() const { return alpha * loop_length_m; }

    static WernerParams from_aggregate(double alpha_ell, double loop_length_m, int p = 10);

    void validate() const;

    bool operator==(const WernerParams&) const = default;
};

/// Mean K slope that places the expected off-diagonal row sum
/// (p - 1) E[sqrt K] f at `target_r` for frequency f_ref and the given loop.
double calibrate_k_mean_slope(int p, double k_sigma_log, double loop_length_m, double f_ref,
                              double target_r);

enum class PhaseMode { Zero, Uniform };
enum class DominancePolicy { Warn, Fail };

struct SynthesisOptions {
    PhaseMode diagonal_phase = PhaseMode::Zero;
    PhaseMode offdiagonal_phase = PhaseMode::Uniform;
    double dominance_ceiling = 1.0;
    DominancePolicy dominance_policy = DominancePolicy::Warn;

    bool operator==(const SynthesisOptions&) const = default;
};

/// max_i sum_{j != i} |H_ij| / |H_ii|. Throws SingularDiagonal on a zero diagonal.
double row_dominance(const CMatrix& h);

/// One tone's channel with its diagonal / off-diagonal split.
struct ChannelSnapshot {
    double freq = 0.0;
    CMatrix h;
    CVector d;  ///< diagonal of h
    CMatrix f;  ///< h with the diagonal zeroed
    double r = 0.0;

    /// Builds the split and r(H). Throws SingularDiagonal naming `tone` if any
    /// |H_ii| == 0.
    static ChannelSnapshot from_matrix(double freq, CMatrix h, std::size_t tone = 0);

    int users() const { return static_cast<int>(h.rows()); }

    /// I + D^{-1} F, the diagonally normalized channel.
    CMatrix normalized() const;
};

struct SynthesizedSource {
    WernerParams params;
    std::uint64_t seed = 0;
    SynthesisOptions options;
};

struct LoadedSource {
    std::string path;
};

using ChannelSource = std::variant<SynthesizedSource, LoadedSource>;

struct ChannelEnsemble {
    ToneGrid grid;
    std::vector<ChannelSnapshot> snapshots;
    ChannelSource source;
    std::vector<std::string> warnings;

    int users() const { return snapshots.empty() ? 0 : snapshots.front().users(); }
    std::size_t tones() const { return snapshots.size(); }
    double r_max() const;
};

ChannelEnsemble synthesize_channel(const WernerParams& params, const ToneGrid& grid,
                                   std::uint64_t seed, const SynthesisOptions& options = {});

struct RowDominanceFit {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double max_residual = 0.0;
    /// gamma1 + gamma2 f >= 0 at every fitted tone. Bounds that take the
    /// line as a dominance envelope need this.
    bool nonnegative = true;
};

/// Least-squares line r(f) ~ gamma1 + gamma2 f over the ensemble's tones.
RowDominanceFit fit_row_dominance(const ChannelEnsemble& ensemble);

/// Least-squares slope (no intercept) of -ln|H_ii(f)| against sqrt(f), pooled
/// over users and tones: the aggregate amplitude exponent alpha * loop length.
double fit_alpha(const ChannelEnsemble& ensemble);

}  // namespace xtalk
