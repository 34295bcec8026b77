// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "xtalk/channel_io.hpp"
#include "xtalk/channel_model.hpp"

using namespace xtalk;
using Catch::Approx;

namespace {

// Ensemble with prescribed r(f) on a grid: 2x2 channels [[1, r],[0, 1]].
ChannelEnsemble ensemble_with_r(const ToneGrid& grid, const std::function<double(double)>& r) {
    ChannelEnsemble e;
    e.grid = grid;
    for (std::size_t k = 0; k < grid.count(); ++k) {
        CMatrix h = CMatrix::Identity(2, 2);
        h(0, 1) = r(grid.freq(k));
        e.snapshots.push_back(ChannelSnapshot::from_matrix(grid.freq(k), h, k));
    }
    return e;
}

// Normal-equations line fit, written independently of the centered form.
std::pair<double, double> normal_equations(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    return {(sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det};
}

}  // namespace

TEST_CASE("tone grid arithmetic", "[channel_model]") {
    ToneGrid g{0.0, 30e6, kDmtToneSpacing};
    CHECK(g.count() == 6957);
    CHECK(g.freq(6956) == 6956 * 4312.5);
    CHECK(ToneGrid::with_count(0.0, 30e6, 512).count() == 512);
    CHECK(ToneGrid::with_count(0.0, 30e6, 512).freq(511) == Approx(30e6).epsilon(1e-15));
    CHECK(ToneGrid::single(1.5e6).count() == 1);
    CHECK(g.decimated(10).count() == 696);
    CHECK_THROWS_AS((ToneGrid{1.0, 1.0, 1.0}.validate()), Error);
    CHECK_THROWS_AS((ToneGrid{0.0, 1.0, -1.0}.validate()), Error);
    CHECK_THROWS_AS((ToneGrid{-1.0, 1.0, 1.0}.validate()), Error);
}

TEST_CASE("snapshot split and row dominance", "[channel_model]") {
    auto s = ChannelSnapshot::from_matrix(0.0, CMatrix::Identity(2, 2));
    CHECK(s.r == 0.0);
    CHECK(s.d == CVector::Ones(2));
    CHECK(s.f.isZero(0.0));

    CMatrix h(2, 2);
    h << cplx(2, 0), cplx(0, 1), cplx(0.5, 0.5), cplx(0, -1);
    s = ChannelSnapshot::from_matrix(1.0, h);
    CHECK(s.r == Approx(std::abs(cplx(0.5, 0.5))));
    CHECK(s.d.asDiagonal().toDenseMatrix() + s.f == h);

    h(1, 1) = 0.0;
    try {
        ChannelSnapshot::from_matrix(1.0, h, 42);
        FAIL("expected SingularDiagonal");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularDiagonal);
        CHECK(std::string(e.what()).find("tone 42") != std::string::npos);
    }
}

TEST_CASE("row dominance is invariant under row scaling", "[channel_model][property]") {
    test::Gen g(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int p = g.integer(2, 8);
        CMatrix h = g.dominant_channel(p, g.uniform(0.0, 2.0));
        const double r = row_dominance(h);
        const int row = g.integer(0, p - 1);
        h.row(row) *= g.log_uniform(1e-6, 1e6) * g.unit_phase();
        REQUIRE(row_dominance(h) == Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("synthesized channels follow the insertion-loss and FEXT model", "[channel_model]") {
    WernerParams w = WernerParams::from_aggregate(0.0019, 1.0, 4);
    const ToneGrid grid = ToneGrid::with_count(0.0, 30e6, 64);
    SynthesisOptions opt;
    opt.dominance_ceiling = 100.0;
    const auto e = synthesize_channel(w, grid, 9, opt);
    REQUIRE(e.snapshots.size() == grid.count());

    // f = 0: unit diagonal, no FEXT.
    CHECK(e.snapshots[0].r == 0.0);
    CHECK(e.snapshots[0].f.isZero(0.0));
    for (int i = 0; i < 4; ++i) CHECK(std::abs(e.snapshots[0].d(i)) == 1.0);

    // 30 MHz insertion loss.
    CHECK(std::abs(e.snapshots.back().d(0)) == Approx(std::exp(-0.0019 * std::sqrt(30e6))));
    CHECK(std::log(std::abs(e.snapshots.back().d(0))) == Approx(-10.4067).epsilon(1e-4));

    // Off-diagonal magnitude / (f |IL|) is a frequency-flat sqrt(K).
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            const auto& a = e.snapshots[10];
            const auto& b = e.snapshots[50];
            const double ka = std::abs(a.h(i, j)) / (a.freq * std::abs(a.d(i)));
            const double kb = std::abs(b.h(i, j)) / (b.freq * std::abs(b.d(i)));
            REQUIRE(ka == Approx(kb).epsilon(1e-12));
        }
    for (const auto& s : e.snapshots) REQUIRE(s.d.asDiagonal().toDenseMatrix() + s.f == s.h);
}

TEST_CASE("synthesis is deterministic per seed", "[channel_model]") {
    const auto w = test::binder_werner();
    const ToneGrid grid = ToneGrid::with_count(0.0, 30e6, 32);
    const auto a = synthesize_channel(w, grid, 1234);
    const auto b = synthesize_channel(w, grid, 1234);
    const auto c = synthesize_channel(w, grid, 1235);
    for (std::size_t k = 0; k < grid.count(); ++k) REQUIRE(a.snapshots[k].h == b.snapshots[k].h);
    CHECK(a.snapshots[20].h != c.snapshots[20].h);
}

TEST_CASE("zero-phase synthesis gives r nondecreasing in f", "[channel_model][property]") {
    SynthesisOptions opt;
    opt.offdiagonal_phase = PhaseMode::Zero;
    opt.dominance_ceiling = 1e9;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto e = synthesize_channel(test::binder_werner(), ToneGrid::with_count(0, 30e6, 100),
                                          seed, opt);
        for (std::size_t k = 1; k < e.snapshots.size(); ++k)
            REQUIRE(e.snapshots[k].r >= e.snapshots[k - 1].r);
    }
}

TEST_CASE("dominance ceiling warns or fails by policy", "[channel_model]") {
    SynthesisOptions opt;
    opt.dominance_ceiling = 0.5;
    const auto grid = ToneGrid::with_count(0, 30e6, 16);
    const auto e = synthesize_channel(test::binder_werner(), grid, 1, opt);
    CHECK(e.r_max() > 0.5);
    REQUIRE(e.warnings.size() == 1);
    CHECK(e.warnings[0].rfind("DominanceViolation", 0) == 0);
    opt.dominance_policy = DominancePolicy::Fail;
    CHECK_THROWS_AS(synthesize_channel(test::binder_werner(), grid, 1, opt), Error);

    WernerParams bad = test::binder_werner();
    bad.alpha = std::nan("");
    CHECK_THROWS_AS(synthesize_channel(bad, grid, 1), Error);
}

TEST_CASE("K calibration places mean dominance at the target", "[channel_model]") {
    const double target = 0.1596 + 3.1729e-8 * 30e6;
    const double slope = calibrate_k_mean_slope(10, 0.5, 300.0, 30e6, target);
    CHECK(slope == Approx(WernerParams{}.k_mean_slope).epsilon(1e-5));

    // Average row sum over many seeds at 30 MHz approaches the target.
    double mean_row = 0.0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        const auto e = synthesize_channel(test::binder_werner(), ToneGrid::single(30e6), s,
                                          SynthesisOptions{.dominance_ceiling = 1e9});
        const auto& snap = e.snapshots[0];
        for (int i = 0; i < 10; ++i)
            mean_row += (snap.f.row(i).cwiseAbs().sum() / std::abs(snap.d(i))) / (10.0 * seeds);
    }
    CHECK(mean_row == Approx(target).epsilon(0.02));
}

TEST_CASE("row dominance fit recovers exact lines", "[channel_model]") {
    const ToneGrid grid = ToneGrid::with_count(0.0, 30e6, 300);
    auto zero = fit_row_dominance(ensemble_with_r(grid, [](double) { return 0.0; }));
    CHECK(zero.gamma1 == 0.0);
    CHECK(zero.gamma2 == 0.0);

    auto fit = fit_row_dominance(ensemble_with_r(grid, [](double f) { return 0.1596 + 3.1729e-8 * f; }));
    CHECK(std::abs(fit.gamma1 / 0.1596 - 1.0) <= 1e-10);
    CHECK(std::abs(fit.gamma2 / 3.1729e-8 - 1.0) <= 1e-10);
    CHECK(fit.max_residual < 1e-12);
    CHECK(fit.nonnegative);

    CHECK_THROWS_AS(fit_row_dominance(ensemble_with_r(ToneGrid::single(1e6), [](double) { return 0.1; })),
                    Error);
}

TEST_CASE("row dominance fit agrees with the normal equations under noise", "[channel_model][property]") {
    test::Gen g(77);
    for (int trial = 0; trial < 50; ++trial) {
        const double g1 = g.uniform(0.0, 0.5), g2 = g.uniform(0.0, 5e-8), eps = g.uniform(0.0, 0.05);
        const ToneGrid grid = ToneGrid::with_count(g.uniform(0, 1e6), 30e6, g.integer(2, 200));
        std::vector<double> xs, ys;
        auto e = ensemble_with_r(grid, [&](double f) {
            const double y = g1 + g2 * f + g.uniform(-eps, eps);
            xs.push_back(f);
            ys.push_back(std::abs(y));
            return y;
        });
        const auto fit = fit_row_dominance(e);
        const auto [a, b] = normal_equations(xs, ys);
        REQUIRE(fit.gamma1 == Approx(a).margin(1e-9));
        REQUIRE(fit.gamma2 == Approx(b).margin(1e-15));
        if (grid.count() >= 20) REQUIRE(std::abs(fit.gamma1 - g1) <= 2.0 * eps + 1e-12);
    }
}

TEST_CASE("alpha fit recovers the aggregate exponent", "[channel_model]") {
    const auto e = synthesize_channel(WernerParams::from_aggregate(0.0019, 1.0, 3),
                                      ToneGrid::with_count(0, 30e6, 50), 5,
                                      SynthesisOptions{.dominance_ceiling = 1e9});
    CHECK(std::abs(fit_alpha(e) / 0.0019 - 1.0) <= 1e-12);

    auto flat = ensemble_with_r(ToneGrid::with_count(0, 1e6, 5), [](double) { return 0.0; });
    CHECK(fit_alpha(flat) == 0.0);

    // Identical diagonals in two users pool to the single-user slope.
    ChannelEnsemble one, two;
    for (int k = 1; k <= 5; ++k) {
        const double f = k * 1e6, il = std::exp(-0.003 * std::sqrt(f) + 0.01 * (k % 2));
        CMatrix h1(1, 1), h2 = CMatrix::Identity(2, 2) * il;
        h1(0, 0) = il;
        one.snapshots.push_back(ChannelSnapshot::from_matrix(f, h1));
        two.snapshots.push_back(ChannelSnapshot::from_matrix(f, h2));
    }
    CHECK(fit_alpha(one) == Approx(fit_alpha(two)).epsilon(1e-14));

    auto dc = ensemble_with_r(ToneGrid::single(0.0), [](double) { return 0.0; });
    CHECK_THROWS_AS(fit_alpha(dc), Error);
}

TEST_CASE("channel files round-trip bit-exactly", "[channel_io]") {
    const auto e = synthesize_channel(test::binder_werner(), ToneGrid::with_count(0, 30e6, 12), 8);
    const auto back = parse_channel(format_channel(e));
    REQUIRE(back.grid.count() == e.grid.count());
    CHECK(back.grid.f_start == e.grid.f_start);
    CHECK(back.grid.spacing == e.grid.spacing);
    for (std::size_t k = 0; k < e.snapshots.size(); ++k) {
        REQUIRE(back.snapshots[k].h == e.snapshots[k].h);
        REQUIRE(back.snapshots[k].freq == e.snapshots[k].freq);
        REQUIRE(back.snapshots[k].r == e.snapshots[k].r);
    }
    CHECK(format_channel(back).find("\"type\": \"file\"") != std::string::npos);

    const auto path = std::filesystem::temp_directory_path() / "xtalk_roundtrip.json";
    save_channel(e, path.string());
    CHECK(load_channel(path.string()).snapshots[5].h == e.snapshots[5].h);
    std::filesystem::remove(path);
}

TEST_CASE("channel file parsing errors", "[channel_io]") {
    const std::string ident = R"({"format": "xtalk-channel", "format_version": 1, "p": 2,
        "tone_count": 1, "f_start": 0, "spacing": 4312.5,
        "tones": [{"freq": 0, "H": [[1,0],[0,0],[0,0],[1,0]]}]})";
    const auto e = parse_channel(ident);
    CHECK(e.snapshots[0].r == 0.0);
    CHECK(e.snapshots[0].d == CVector::Ones(2));

    std::string zero_diag = ident;
    zero_diag.replace(zero_diag.rfind("[1,0]"), 5, "[0,0]");
    try {
        parse_channel(zero_diag);
        FAIL("expected SingularDiagonal");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::SingularDiagonal);
        CHECK(std::string(err.what()).find("tone 0") != std::string::npos);
    }

    try {
        parse_channel("{\n\"format\": \"xtalk-channel\",\n\"p\": ]\n}");
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.line() == 3);
    }
    std::string short_h = ident;
    short_h.replace(short_h.find("[[1,0],"), 7, "[");
    CHECK_THROWS_AS(parse_channel(short_h), ParseError);
    std::string bad_count = ident;
    bad_count.replace(bad_count.find("\"tone_count\": 1"), 15, "\"tone_count\": 2");
    CHECK_THROWS_AS(parse_channel(bad_count), ParseError);
    CHECK_THROWS_AS(load_channel("/nonexistent/file.json"), ParseError);
}
