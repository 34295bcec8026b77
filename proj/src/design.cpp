// SPDX-License-Identifier: Apache-2.0
#include "xtalk/design.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "xtalk/parallel.hpp"

namespace xtalk {

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

double exact_root(double a, double b, double t) {
    if (a == 0.0) return std::log2(b / t);
    // 2A / (sqrt(B^2 + 4AT) - B) = (sqrt(B^2 + 4AT) + B) / 2T, free of cancellation.
    return std::log2((std::sqrt(b * b + 4.0 * a * t) + b) / (2.0 * t));
}

// Shared integer search: start at ceil(d_analytic) (at least min_bits), move
// up until the bound holds, then down while it still holds.
void settle(BitDesign& out, int min_bits, const std::function<double(int)>& bound) {
    int d = static_cast<int>(std::ceil(out.d_analytic));
    if (d < min_bits) {
        out.notices.push_back("closed-form d " + fmt(out.d_analytic) + " raised to the floor " +
                              std::to_string(min_bits));
        d = min_bits;
    }
    const int start = d;
    while (!(bound(d) <= out.target)) {
        if (++d > kMaxDesignBits)
            throw Error(ErrorCode::TargetUnreachable,
                        "target " + fmt(out.target) + " not met for d <= " + std::to_string(kMaxDesignBits));
    }
    if (d > start)
        out.notices.push_back("post-hoc check raised d from " + std::to_string(start) + " to " +
                              std::to_string(d));
    const int verified = d;
    while (d - 1 >= min_bits && bound(d - 1) <= out.target) --d;
    if (d < verified)
        out.notices.push_back("decrement probe lowered d from " + std::to_string(verified) + " to " +
                              std::to_string(d));
    out.bits = d;
    out.bound_at_bits = bound(d);
}

}  // namespace

QuadraticSolution solve_quadratic_budget(const QuadraticBudget& q) {
    if (!(q.a > 0.0) || !(q.b > 0.0) || !(q.t > 0.0) || !std::isfinite(q.a) || !std::isfinite(q.b) ||
        !std::isfinite(q.t))
        throw Error(ErrorCode::InvalidParams, "quadratic budget needs finite A, B, T > 0");
    QuadraticSolution s;
    s.linear_regime = q.t <= q.b * q.b / (4.0 * q.a);
    // Second branch: 1 + sqrt(1 + rho) <= 2.5 sqrt(rho) gives log2(2.5 sqrt(A/T)).
    s.d = s.linear_regime ? std::log2(1.25 * q.b / q.t) : 0.5 * std::log2(6.25 * q.a / q.t);
    s.d_exact = exact_root(q.a, q.b, q.t);
    return s;
}

BitDesign bits_for_tone_loss(const BoundInputs& inputs, double t) {
    inputs.validate();
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidParams, "target t must be positive");

    const double one_r = 1.0 + inputs.r;
    const double u = 2.0 * inputs.rho * (inputs.p - 1) * one_r * one_r * inputs.snr;
    const double v = std::numbers::sqrt2 * one_r;
    const double a = u;
    const double b = std::exp2(t + 1.0) * v;
    const double tt = std::expm1(t * kLn2);  // 2^t - 1

    BitDesign out;
    out.target = t;
    // The closed form replaces 2^t - 1 by its lower bound t ln 2.
    const bool linear = a == 0.0 || tt <= b * b / (4.0 * a);
    out.d_analytic = linear ? std::log2(1.25 * v * std::exp2(t + 1.0) / (t * kLn2))
                            : 0.5 * std::log2(6.25 * u / (t * kLn2));
    out.d_exact = exact_root(a, b, tt);

    const double floor = main_bound_floor(inputs.r);
    int min_bits = static_cast<int>(std::ceil(floor));
    BoundInputs probe = inputs;
    auto bound = [&](int d) {
        probe.d = d;
        return bound_main_per_tone(probe);
    };
    if (std::isinf(bound(min_bits))) ++min_bits;  // floor exactly integral: bound is vacuous there
    settle(out, min_bits, bound);
    return out;
}

BitDesign bits_for_relative_loss(const WernerBoundParams& params, double tau) {
    if (!(tau > 0.0) || tau > 1.0) throw Error(ErrorCode::InvalidParams, "tau must lie in (0, 1]");
    if (!(params.c > 0.0))
        throw Error(ErrorCode::FloorNonpositive,
                    "spectral-efficiency floor c = " + fmt(params.c) + " is not positive");
    const double c = params.c, zeta = params.zeta_ell;

    BitDesign out;
    out.target = tau;
    const bool linear = !(zeta > 0.0) || tau <= 32.0 / (zeta * c * c);
    out.d_analytic = linear ? std::log2(12.0 * std::numbers::sqrt2 / (c * tau)) : 0.5 * std::log2(6.25 * zeta / tau);
    out.d_exact = exact_root(zeta, 8.0 * std::numbers::sqrt2 / c, tau);
    settle(out, kRelativeBoundMinBits, [&](int d) { return bound_relative(params, d); });
    return out;
}

WernerBoundParams werner_at_length(const WernerBoundParams& ref, double ref_length, double length) {
    if (!(ref_length > 0.0) || !(length > 0.0))
        throw Error(ErrorCode::InvalidParams, "loop lengths must be positive");
    WernerBoundParams w = ref;
    const double s = length / ref_length;
    w.alpha_ell = ref.alpha_ell * s;
    w.gamma2 = ref.gamma2 * std::sqrt(s);
    w.derive();
    return w;
}

std::vector<SweepRow> sweep_bits_vs_loop_length(const std::vector<double>& lengths,
                                                const WernerBoundParams& reference,
                                                double ref_length, double tau) {
    if (lengths.empty()) throw Error(ErrorCode::InvalidParams, "sweep needs at least one length");
    std::vector<SweepRow> rows(lengths.size());
    parallel_for(lengths.size(), [&](std::size_t k) {
        SweepRow& row = rows[k];
        row.length = lengths[k];
        try {
            row.params = werner_at_length(reference, ref_length, lengths[k]);
            row.design = bits_for_relative_loss(row.params, tau);
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    return rows;
}

}  // namespace xtalk
