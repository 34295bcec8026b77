// SPDX-License-Identifier: Apache-2.0
// Hand-rolled generators shared by the property tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "xtalk/channel_model.hpp"
#include "xtalk/linalg.hpp"

namespace xtalk::test {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>()(rng_); }

    cplx unit_phase() { return std::polar(1.0, uniform(0.0, 2.0 * std::numbers::pi)); }
    cplx complex_normal(double var) {
        const double s = std::sqrt(var / 2.0);
        return {s * normal(), s * normal()};
    }

    /// Random p x p matrix with entries of magnitude <= scale.
    CMatrix box(int p, double scale) {
        CMatrix m(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) m(i, j) = cplx(uniform(-scale, scale), uniform(-scale, scale));
        return m;
    }

    /// Random channel with row dominance exactly r_target in its worst row.
    CMatrix dominant_channel(int p, double r_target) {
        CMatrix h(p, p);
        for (int i = 0; i < p; ++i) {
            const double diag = log_uniform(1e-3, 1.0);
            h(i, i) = diag * unit_phase();
            double sum = 0.0;
            for (int j = 0; j < p; ++j)
                if (j != i) {
                    h(i, j) = uniform(0.05, 1.0) * unit_phase();
                    sum += std::abs(h(i, j));
                }
            const double row_r = (i == 0 ? 1.0 : uniform(0.1, 1.0)) * r_target;
            for (int j = 0; j < p; ++j)
                if (j != i) h(i, j) *= sum > 0 ? row_r * diag / sum : 0.0;
        }
        return h;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Parameters of the binder scenario used throughout the reproductions.
inline WernerParams binder_werner(double loop_length_m = 300.0) {
    WernerParams w;
    w.loop_length_m = loop_length_m;
    return w;
}

}  // namespace xtalk::test
