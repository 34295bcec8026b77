// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "oracles.hpp"
#include "support.hpp"
#include "xtalk/analytic_bounds.hpp"
#include "xtalk/monte_carlo.hpp"
#include "xtalk/rng.hpp"

using namespace xtalk;
using Catch::Approx;

namespace {

ChannelEnsemble random_ensemble(test::Gen& g, int p, std::size_t tones, double r) {
    ChannelEnsemble e;
    e.grid = ToneGrid::with_count(1e6, 2e6, tones);
    for (std::size_t k = 0; k < tones; ++k)
        e.snapshots.push_back(ChannelSnapshot::from_matrix(e.grid.freq(k), g.dominant_channel(p, r), k));
    return e;
}

TrialConfig config(int trials, int d, std::uint64_t seed) {
    TrialConfig c;
    c.n_trials = trials;
    c.spec.d_bits = d;
    c.spec.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("zero perturbation gives zero loss", "[monte_carlo]") {
    test::Gen g(1);
    const auto e = random_ensemble(g, 4, 3, 0.5);
    LinkBudget b;
    b.grid = e.grid;
    TrialConfig c = config(1, 14, 0);
    c.zero_errors = true;
    const auto res = run_trials(e, b, c);
    for (const auto& row : res.points[0].report.per_tone)
        for (const auto& t : row) CHECK(t.loss == 0.0);
    for (const auto& band : res.points[0].band_trials) CHECK(band.loss == 0.0);

    const auto csi = run_trials_with_csi_error(e, b, c, CsiErrorModel{10});
    for (const auto& row : csi.points[0].report.per_tone)
        for (const auto& t : row) CHECK(t.loss == 0.0);
}

TEST_CASE("a single trial matches the system oracle", "[monte_carlo]") {
    test::Gen g(2);
    for (int p : {2, 4, 10}) {
        const auto e = random_ensemble(g, p, 4, 0.8);
        LinkBudget b;
        b.grid = e.grid;
        for (int d : {6, 12}) {
            const TrialConfig c = config(1, d, 77);
            const auto res = run_trials(e, b, c);
            for (std::size_t k = 0; k < e.snapshots.size(); ++k) {
                const auto& snap = e.snapshots[k];
                const CMatrix e2 = draw_uniform_box(p, std::ldexp(1.0, -d),
                                                    derive_key(77, Stream::QuantizerDither, {k, 0}));
                const CMatrix pt = ideal_precoder(snap) + e2;
                const CMatrix delta = build_delta(snap, CMatrix::Zero(p, p), e2);
                Eigen::VectorXd psd = Eigen::VectorXd::Constant(p, b.psd_linear(0, k));
                for (int i = 0; i < p; ++i) {
                    const ToneLoss& got = res.points[0].report.per_tone[static_cast<std::size_t>(i)][k];
                    // Common random numbers reproduce the library path bit for bit.
                    CHECK(got.loss == loss_exact(b, snap, delta, i, k).loss);
                    CHECK(got.loss == Approx(test::loss_from_system(snap.h, pt, psd, b.noise_linear(),
                                                                    b.gap(), i))
                                          .margin(1e-10));
                }
            }
        }
    }
}

TEST_CASE("uniform E2 draws agree with the quantizer dither", "[monte_carlo]") {
    PerturbationSpec s;
    s.d_bits = 9;
    s.seed = 5;
    s.e2_model = E2Model::UniformRandom;
    const CMatrix p = CMatrix::Identity(3, 3) * 0.5;
    const auto q = quantize_precoder(p, s, 7, 3);
    CHECK(q.e2 == draw_uniform_box(3, 1.0, derive_key(5, Stream::QuantizerDither, {7, 3})) *
                      std::ldexp(1.0, -9));
    CHECK(max_abs(q.e2) <= std::sqrt(2.0) * std::ldexp(1.0, -9));
}

TEST_CASE("statistics are coherent", "[monte_carlo]") {
    test::Gen g(3);
    const auto e = random_ensemble(g, 5, 6, 0.7);
    LinkBudget b;
    b.grid = e.grid;
    TrialConfig c = config(400, 10, 11);
    const auto worst = run_trials(e, b, c);
    c.statistic = Statistic::Quantile;
    c.quantile = 0.99;
    const auto q99 = run_trials(e, b, c);
    c.statistic = Statistic::Mean;
    const auto mean = run_trials(e, b, c);
    for (std::size_t u = 0; u < 5; ++u) {
        for (std::size_t k = 0; k < 6; ++k) {
            const double w = worst.points[0].report.per_tone[u][k].loss;
            const double q = q99.points[0].report.per_tone[u][k].loss;
            const double m = mean.points[0].report.per_tone[u][k].loss;
            CHECK(w >= q);
            CHECK(q >= m);
            CHECK(std::isnan(mean.points[0].report.per_tone[u][k].a));
        }
        CHECK(worst.points[0].band_trials[u].loss >= q99.points[0].band_trials[u].loss);
        CHECK(q99.points[0].band_trials[u].loss >= mean.points[0].band_trials[u].loss);
        // Per-bin worst cases integrated can only exceed the worst whole-band trial.
        CHECK(worst.points[0].report.band[u].loss >= worst.points[0].band_trials[u].loss);
        CHECK(mean.points[0].report.band[u].loss == Approx(mean.points[0].band_trials[u].loss).epsilon(1e-12));
    }
}

TEST_CASE("results do not depend on the thread count", "[monte_carlo]") {
    test::Gen g(4);
    const auto e = random_ensemble(g, 4, 5, 0.6);
    LinkBudget b;
    b.grid = e.grid;
    TrialConfig c = config(300, 8, 99);
    c.statistic = Statistic::Quantile;
    c.quantile = 0.9;
    const char* old = std::getenv("XTALK_THREADS");
    const std::string saved = old ? old : "";
    setenv("XTALK_THREADS", "1", 1);
    const auto a = run_trial_curve(e, b, c, {6, 10}, CsiErrorModel{100});
    setenv("XTALK_THREADS", "5", 1);
    const auto bb = run_trial_curve(e, b, c, {6, 10}, CsiErrorModel{100});
    if (old) setenv("XTALK_THREADS", saved.c_str(), 1);
    else unsetenv("XTALK_THREADS");
    for (std::size_t di = 0; di < 2; ++di)
        for (std::size_t u = 0; u < 4; ++u) {
            for (std::size_t k = 0; k < 5; ++k)
                CHECK(a.points[di].report.per_tone[u][k].loss == bb.points[di].report.per_tone[u][k].loss);
            CHECK(a.points[di].band_trials[u].loss == bb.points[di].band_trials[u].loss);
        }
}

TEST_CASE("worst case is dominated by the main bound and shrinks with d", "[monte_carlo]") {
    test::Gen g(5);
    for (int rep = 0; rep < 4; ++rep) {
        const int p = g.integer(2, 8);
        const auto e = random_ensemble(g, p, 4, g.uniform(0.05, 1.5));
        LinkBudget b;
        b.grid = e.grid;
        b.psd_dbm_hz.clear();
        for (int i = 0; i < p; ++i) b.psd_dbm_hz.push_back(g.uniform(-70.0, -50.0));
        std::vector<int> ds;
        for (int d = 4; d <= 30; ++d) ds.push_back(d);
        const auto res = run_trial_curve(e, b, config(300, 0 + 14, 1000 + rep), ds);
        for (std::size_t u = 0; u < static_cast<std::size_t>(p); ++u) {
            double prev = std::numeric_limits<double>::infinity();
            for (const auto& pt : res.points) {
                for (std::size_t k = 0; k < e.snapshots.size(); ++k) {
                    const double loss = std::max(0.0, pt.report.per_tone[u][k].loss);
                    const double r = e.snapshots[k].r;
                    if (pt.d_bits >= main_bound_floor(r))
                        CHECK(loss <= main_bound_at_tone(b, e.snapshots[k], static_cast<int>(u), k, pt.d_bits));
                }
                CHECK(pt.report.band[u].loss <= prev);
                prev = pt.report.band[u].loss;
            }
        }
    }
}

TEST_CASE("CSI error vanishes as the sample count grows", "[monte_carlo]") {
    test::Gen g(6);
    const auto e = random_ensemble(g, 4, 3, 0.5);
    LinkBudget b;
    b.grid = e.grid;
    const TrialConfig c = config(200, 10, 3);
    const auto q = run_trials(e, b, c);
    const auto j = run_trials_with_csi_error(e, b, c, CsiErrorModel{1'000'000'000});
    for (std::size_t u = 0; u < 4; ++u)
        CHECK(j.points[0].report.band[u].loss ==
              Approx(q.points[0].report.band[u].loss).epsilon(1e-3));
    const auto noisy = run_trials_with_csi_error(e, b, c, CsiErrorModel{10});
    for (std::size_t u = 0; u < 4; ++u)
        CHECK(noisy.points[0].report.band[u].loss > q.points[0].report.band[u].loss);
}

TEST_CASE("deterministic rounding repeats across trials", "[monte_carlo]") {
    test::Gen g(7);
    ChannelEnsemble e = random_ensemble(g, 3, 2, 0.4);
    LinkBudget b;
    b.grid = e.grid;
    TrialConfig c = config(5, 12, 0);
    c.spec.e2_model = E2Model::DeterministicRounding;
    const auto worst = run_trials(e, b, c);
    c.statistic = Statistic::Mean;
    const auto mean = run_trials(e, b, c);
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& snap = e.snapshots[k];
        const CMatrix pz = ideal_precoder(snap);
        const auto qz = quantize_precoder(pz, c.spec, k, 0, true);
        const CMatrix delta = build_delta(snap, CMatrix::Zero(3, 3), qz.e2 / qz.scale);
        for (std::size_t u = 0; u < 3; ++u) {
            const double want = loss_exact(b, snap, delta, static_cast<int>(u), k).loss;
            CHECK(worst.points[0].report.per_tone[u][k].loss == Approx(want).epsilon(1e-13));
            CHECK(mean.points[0].report.per_tone[u][k].loss == Approx(want).epsilon(1e-13));
        }
    }
}

TEST_CASE("empirical minimum bits", "[monte_carlo]") {
    test::Gen g(8);
    const auto e = random_ensemble(g, 4, 2, 0.5);
    LinkBudget b;
    b.grid = e.grid;
    const TrialConfig c = config(200, 14, 21);
    CHECK(min_bits_empirical(e, b, c, 1.0) == 1);
    const int d = min_bits_empirical(e, b, c, 0.01);
    std::vector<int> ds;
    for (int x = d; x <= kMaxEmpiricalBits; ++x) ds.push_back(x);
    const auto res = run_trial_curve(e, b, c, ds);
    for (const auto& pt : res.points) CHECK(worst_relative_loss(pt) <= 0.01);
    CHECK(worst_relative_loss(run_trial_curve(e, b, c, {d - 1}).points[0]) > 0.01);
    CHECK_THROWS_AS(min_bits_empirical(e, b, c, 0.0), Error);
    CHECK_THROWS_AS(min_bits_empirical(e, b, c, 1e-30), Error);
}

TEST_CASE("trial config validation", "[monte_carlo]") {
    TrialConfig c;
    c.n_trials = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.n_trials = 1;
    c.statistic = Statistic::Quantile;
    c.quantile = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(CsiErrorModel{0}.validate(), Error);
}
