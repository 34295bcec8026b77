// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xtalk/analytic_bounds.hpp"

namespace xtalk {

/// A 2^{-2d} + b 2^{-d} <= t.
struct QuadraticBudget {
    double a = 1.0;
    double b = 1.0;
    double t = 1.0;
};

struct QuadraticSolution {
    double d = 0.0;        ///< d(T): log2(1.25 B/T) or log2(2.5 sqrt(A/T))
    double d_exact = 0.0;  ///< d0(T) = log2(2A / (sqrt(B^2 + 4AT) - B))
    bool linear_regime = true;  ///< T <= B^2 / 4A (first branch)
};

/// Word length guaranteeing a 2^{-2d} + b 2^{-d} <= t for all d >= d(T).
/// Throws InvalidParams unless a, b, t > 0.
QuadraticSolution solve_quadratic_budget(const QuadraticBudget& q);

/// Result of an integer word-length design.
struct BitDesign {
    int bits = 0;             ///< smallest admissible integer word length found
    double d_analytic = 0.0;  ///< real-valued closed-form d(.)
    double d_exact = 0.0;     ///< exact root of the quadratic surrogate (diagnostic)
    double bound_at_bits = 0.0;  ///< bound evaluated at `bits`; always <= target
    double target = 0.0;
    std::vector<std::string> notices;
};

/// Largest word length considered by the designers.
inline constexpr int kMaxDesignBits = 64;

/// Minimum integer d with bound_main_per_tone(d) <= t, starting from the
/// closed-form d(t), verified post hoc and tightened by a decrement probe.
/// Never below the main bound's floor 1/2 + log2(1 + r).
BitDesign bits_for_tone_loss(const BoundInputs& inputs, double t);

/// Word length at which the relative-loss derivation is valid
/// (2^{-d + 1.5} <= 1/2).
inline constexpr int kRelativeBoundMinBits = 3;

/// Minimum integer d with bound_relative(d) <= tau, via the closed-form
/// d(tau), post-hoc verification and a decrement probe. Throws
/// FloorNonpositive when the spectral floor c <= 0.
BitDesign bits_for_relative_loss(const WernerBoundParams& params, double tau);

/// Rescales the loop-length dependent parameters from ref_length to length:
/// alpha_ell grows linearly, gamma2 as sqrt(length), gamma1 is kept, and the
/// derived quantities are recomputed.
WernerBoundParams werner_at_length(const WernerBoundParams& ref, double ref_length, double length);

struct SweepRow {
    double length = 0.0;
    WernerBoundParams params;
    std::optional<BitDesign> design;
    std::optional<std::string> error;  ///< set when this length has no valid design
};

/// bits_for_relative_loss at each length; per-length failures are recorded
/// in the row and the sweep continues.
std::vector<SweepRow> sweep_bits_vs_loop_length(const std::vector<double>& lengths,
                                                const WernerBoundParams& reference,
                                                double ref_length, double tau);

}  // namespace xtalk
