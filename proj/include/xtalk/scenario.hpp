// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xtalk/analytic_bounds.hpp"
#include "xtalk/channel_model.hpp"
#include "xtalk/monte_carlo.hpp"
#include "xtalk/precoding.hpp"
#include "xtalk/rate_analysis.hpp"

namespace xtalk {

inline constexpr int kScenarioFormatVersion = 1;

struct ChannelConfig {
    enum class Kind { Werner, File };
    Kind kind = Kind::Werner;
    WernerParams werner;
    ToneGrid grid;
    std::size_t decimate = 1;  ///< keep every n-th tone of `grid`
    std::uint64_t seed = 1;
    SynthesisOptions synthesis;
    std::string path;  ///< Kind::File only

    bool operator==(const ChannelConfig&) const = default;
};

/// Explicit Werner-profile bound parameters; when absent they are fitted
/// from the channel (fit_alpha and fit_row_dominance).
struct WernerFit {
    double alpha_ell = 0.0019;
    double gamma1 = 0.1596;
    double gamma2 = 3.1729e-8;

    bool operator==(const WernerFit&) const = default;
};

struct CurveRange {
    int d_min = 8;
    int d_max = 20;

    bool operator==(const CurveRange&) const = default;
};

struct DesignConfig {
    std::optional<double> target_tone;      ///< per-tone loss target t, bits
    std::optional<double> target_relative;  ///< band relative loss target tau
    std::vector<double> lengths;            ///< loop lengths for sweeps, m
    double ref_length = 300.0;              ///< length at which the Werner fit holds

    bool operator==(const DesignConfig&) const = default;
};

/// Everything one CLI invocation needs. Budget grid is taken from the channel.
struct Scenario {
    ChannelConfig channel;
    LinkBudget budget;
    PerturbationSpec perturbation;
    TrialConfig trials;
    CurveRange curve;
    DesignConfig design;
    std::optional<WernerFit> werner_fit;

    /// Throws InvalidParams (or InvalidBudget) describing the first bad field.
    void validate() const;
};

/// Parses a scenario document. Missing keys keep their defaults; unknown keys
/// are rejected so typos do not silently fall back to defaults.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<memory>");
Scenario load_scenario(const std::string& path);

/// Canonical JSON with every field spelled out. parse(format(s)) == s.
std::string format_scenario(const Scenario& scenario);

/// FNV-1a 64 of the compact canonical JSON; identifies a scenario in reports.
std::uint64_t scenario_hash(const Scenario& scenario);

/// Synthesizes or loads the channel and applies decimation.
ChannelEnsemble build_ensemble(const Scenario& scenario);

/// Scenario budget bound to the ensemble's grid.
LinkBudget bind_budget(const Scenario& scenario, const ChannelEnsemble& ensemble);

/// Werner bound parameters at the scenario's reference length: the explicit
/// werner_fit if present, otherwise fitted from the ensemble. band = f_end.
WernerBoundParams werner_bound_params(const Scenario& scenario, const ChannelEnsemble& ensemble,
                                      const LinkBudget& budget);

}  // namespace xtalk
