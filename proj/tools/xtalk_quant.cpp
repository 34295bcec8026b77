// SPDX-License-Identifier: Apache-2.0
// xtalk-quant: command-line front end. Every subcommand reads an optional
// scenario file (--config); flags override its keys.
#include <algorithm>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>

#include <CLI11.hpp>

#include "xtalk/analytic_bounds.hpp"
#include "xtalk/channel_io.hpp"
#include "xtalk/design.hpp"
#include "xtalk/monte_carlo.hpp"
#include "xtalk/parallel.hpp"
#include "xtalk/report.hpp"
#include "xtalk/rng.hpp"
#include "xtalk/scenario.hpp"

using namespace xtalk;

namespace {

// Flags registered on a subcommand, applied on top of the loaded scenario.
class Overrides {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& name, const std::string& help,
                     std::function<void(Scenario&, const T&)> set) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app->add_option(name, *value, help);
        apply_.push_back([opt, value, set](Scenario& s) {
            if (opt->count() > 0) set(s, *value);
        });
        return opt;
    }

    CLI::Option* flag(CLI::App* app, const std::string& name, const std::string& help,
                      std::function<void(Scenario&)> set) {
        CLI::Option* opt = app->add_flag(name, help);
        apply_.push_back([opt, set](Scenario& s) {
            if (opt->count() > 0) set(s);
        });
        return opt;
    }

    void apply(Scenario& s) const {
        for (const auto& f : apply_) f(s);
    }

private:
    std::vector<std::function<void(Scenario&)>> apply_;
};

struct Common {
    std::string config;
    std::string out;
    std::string save_config;
    Overrides overrides;
};

void add_channel_flags(CLI::App* app, Common& c) {
    auto& o = c.overrides;
    app->add_option("--config", c.config, "scenario file (JSON)");
    app->add_option("--save-config", c.save_config, "write the effective scenario here");
    o.add<std::string>(app, "--channel", "channel file; replaces the synthesized source",
                       [](Scenario& s, const std::string& v) {
                           s.channel.kind = ChannelConfig::Kind::File;
                           s.channel.path = v;
                       });
    o.add<std::uint64_t>(app, "--seed", "channel synthesis seed",
                         [](Scenario& s, const std::uint64_t& v) { s.channel.seed = v; });
    o.add<double>(app, "--length", "loop length in m",
                  [](Scenario& s, const double& v) { s.channel.werner.loop_length_m = v; });
    o.add<int>(app, "--pairs", "number of pairs p",
               [](Scenario& s, const int& v) { s.channel.werner.p = v; });
    o.add<double>(app, "--band", "upper band edge in Hz",
                  [](Scenario& s, const double& v) { s.channel.grid.f_end = v; });
    o.add<double>(app, "--spacing", "tone spacing in Hz",
                  [](Scenario& s, const double& v) { s.channel.grid.spacing = v; });
    o.add<std::size_t>(app, "--decimate", "keep every n-th tone",
                       [](Scenario& s, const std::size_t& v) { s.channel.decimate = v; });
}

void add_budget_flags(CLI::App* app, Common& c) {
    auto& o = c.overrides;
    o.add<std::vector<double>>(app, "--psd", "transmit PSD in dBm/Hz (one value or one per user)",
                               [](Scenario& s, const std::vector<double>& v) { s.budget.psd_dbm_hz = v; });
    o.add<double>(app, "--noise", "noise PSD in dBm/Hz",
                  [](Scenario& s, const double& v) { s.budget.noise_psd_dbm_hz = v; });
    o.add<double>(app, "--gap", "Shannon gap in dB", [](Scenario& s, const double& v) { s.budget.gamma_gap_db = v; });
}

void add_curve_flags(CLI::App* app, Common& c) {
    c.overrides.add<int>(app, "--d-min", "smallest word length of the curve",
                         [](Scenario& s, const int& v) { s.curve.d_min = v; });
    c.overrides.add<int>(app, "--d-max", "largest word length of the curve",
                         [](Scenario& s, const int& v) { s.curve.d_max = v; });
}

void add_werner_fit_flags(CLI::App* app, Common& c) {
    auto fit = [](Scenario& s) -> WernerFit& {
        if (!s.werner_fit) s.werner_fit = WernerFit{};
        return *s.werner_fit;
    };
    c.overrides.add<double>(app, "--alpha-ell", "Werner amplitude exponent alpha*ell (skips the fit)",
                            [fit](Scenario& s, const double& v) { fit(s).alpha_ell = v; });
    c.overrides.add<double>(app, "--gamma1", "row-dominance intercept (skips the fit)",
                            [fit](Scenario& s, const double& v) { fit(s).gamma1 = v; });
    c.overrides.add<double>(app, "--gamma2", "row-dominance slope per Hz (skips the fit)",
                            [fit](Scenario& s, const double& v) { fit(s).gamma2 = v; });
    c.overrides.flag(app, "--reference-fit", "use alpha*ell = 0.0019, gamma1 = 0.1596, gamma2 = 3.1729e-8",
                     [](Scenario& s) { s.werner_fit = WernerFit{}; });
}

Scenario load(const Common& c) {
    Scenario s = c.config.empty() ? Scenario{} : load_scenario(c.config);
    c.overrides.apply(s);
    s.validate();
    if (!c.save_config.empty()) {
        std::FILE* f = std::fopen(c.save_config.c_str(), "wb");
        if (!f) throw Error(ErrorCode::InvalidParams, "cannot write '" + c.save_config + "'");
        const std::string text = format_scenario(s);
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    }
    return s;
}

void emit(const Table& t, const Scenario& s, const std::string& out) {
    if (out.empty()) std::cout << format_table(t, scenario_hash(s));
    else write_table(t, scenario_hash(s), out);
}

void print_channel_summary(const ChannelEnsemble& e) {
    double rmin = 1e300, rmax = 0.0, rsum = 0.0;
    for (const auto& s : e.snapshots) {
        rmin = std::min(rmin, s.r);
        rmax = std::max(rmax, s.r);
        rsum += s.r;
    }
    std::printf("pairs: %d\ntones: %zu (%.17g .. %.17g Hz, spacing %.17g Hz)\n", e.users(), e.tones(),
                e.grid.f_start, e.grid.freq(e.tones() - 1), e.grid.spacing);
    std::printf("r(H): min %.6g  mean %.6g  max %.6g\n", rmin, rsum / static_cast<double>(e.tones()), rmax);
    try {
        const RowDominanceFit fit = fit_row_dominance(e);
        std::printf("row-dominance fit: gamma1 %.6g  gamma2 %.6g /Hz  max residual %.3g%s\n", fit.gamma1,
                    fit.gamma2, fit.max_residual, fit.nonnegative ? "" : "  (line negative on the grid)");
        std::printf("regime: %s\n", fit.gamma2 >= 0.0 && fit.nonnegative ? "sub-linear row dominance"
                                                                          : "outside the sub-linear model");
    } catch (const Error& err) {
        std::printf("row-dominance fit: unavailable (%s)\n", err.what());
    }
    try {
        std::printf("insertion-loss fit: alpha*ell %.6g\n", fit_alpha(e));
    } catch (const Error& err) {
        std::printf("insertion-loss fit: unavailable (%s)\n", err.what());
    }
    for (const auto& w : e.warnings) std::printf("warning: %s\n", w.c_str());
}

int cmd_synth(const Common& c) {
    if (c.out.empty()) throw Error(ErrorCode::InvalidParams, "--out is required");
    Scenario s = load(c);
    if (s.channel.kind != ChannelConfig::Kind::Werner)
        throw Error(ErrorCode::InvalidParams, "synth-channel needs a Werner source");
    const ChannelEnsemble e = build_ensemble(s);
    save_channel(e, c.out);
    print_channel_summary(e);
    return 0;
}

int cmd_inspect(const std::string& path) {
    print_channel_summary(load_channel(path));
    return 0;
}

// Per-tone Delta for the scenario's single perturbation draw.
std::vector<CMatrix> perturbation_deltas(const ChannelEnsemble& e, const LinkBudget& b,
                                         const PerturbationSpec& spec, bool zero) {
    std::vector<CMatrix> deltas(e.tones());
    const int p = e.users();
    parallel_for(e.tones(), [&](std::size_t k) {
        const auto& snap = e.snapshots[k];
        if (zero) {
            deltas[k] = CMatrix::Zero(p, p);
            return;
        }
        const QuantizedPrecoder q = quantize_precoder(ideal_precoder(snap, k), spec, k, 0, true);
        CMatrix e1 = CMatrix::Zero(p, p);
        if (spec.csi_samples)
            e1 = draw_csi_error(b.snr_vector(snap, k), *spec.csi_samples,
                                derive_key(spec.seed, Stream::EstimationError, {k, 0, 0}));
        deltas[k] = build_delta(snap, e1, q.e2 / q.scale, k);
    });
    return deltas;
}

std::vector<int> all_users(const ChannelEnsemble& e) {
    std::vector<int> u(static_cast<std::size_t>(e.users()));
    std::iota(u.begin(), u.end(), 0);
    return u;
}

int cmd_analyze(const Common& c, bool zero) {
    const Scenario s = load(c);
    const ChannelEnsemble e = build_ensemble(s);
    const LinkBudget b = bind_budget(s, e);
    const LossReport r = analyze_losses(b, e, perturbation_deltas(e, b, s.perturbation, zero));
    Table t = loss_table(r, e, all_users(e));
    t.meta = {{"d_bits", num(s.perturbation.d_bits)},
              {"e2_model", s.perturbation.e2_model == E2Model::DeterministicRounding ? "rounding" : "uniform"},
              {"csi_samples", s.perturbation.csi_samples ? num(*s.perturbation.csi_samples) : "none"}};
    emit(t, s, c.out);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.band.size(); ++i) {
        if (r.band[i].eta) worst = std::max(worst, *r.band[i].eta);
        std::fprintf(stderr, "user %zu: rate %.6g bit/s  loss %.6g bit/s  eta %s\n", i, r.band[i].rate,
                     r.band[i].loss, r.band[i].eta ? num(*r.band[i].eta).c_str() : "undefined");
    }
    std::fprintf(stderr, "max eta: %.6g\n", worst);
    return 0;
}

int cmd_bound(const Common& c, const std::string& which) {
    const Scenario s = load(c);
    const ChannelEnsemble e = build_ensemble(s);
    const LinkBudget b = bind_budget(s, e);
    const bool all = which == "all";
    auto wants = [&](const char* name) { return all || which == name; };
    const int p = e.users();

    std::optional<WernerBoundParams> w;
    if (wants("werner") || wants("relative")) {
        try {
            w = werner_bound_params(s, e, b);
        } catch (const Error&) {
            if (!all) throw;
        }
    }

    Table t;
    t.kind = "bound";
    t.meta = {{"which", which}, {"r_max", num(e.r_max())}};
    if (w)
        t.meta.insert(t.meta.end(), {{"alpha_ell", num(w->alpha_ell)},
                                     {"gamma1", num(w->gamma1)},
                                     {"gamma2", num(w->gamma2)},
                                     {"spectral_floor_c", num(w->c)},
                                     {"zeta", num(w->zeta_ell)}});
    t.columns = {"row_type", "d", "user", "rate", "general", "main", "simplified", "werner", "relative"};
    // A bound asked for by name propagates its precondition error; under "all"
    // an inapplicable bound leaves its cell empty.
    auto cell = [&](const char* name, const std::function<double()>& f) -> std::string {
        if (!wants(name)) return "";
        try {
            return num(f());
        } catch (const Error&) {
            if (!all) throw;
            return "";
        }
    };
    for (int d = s.curve.d_min; d <= s.curve.d_max; ++d) {
        for (int i = 0; i < p; ++i) {
            double rate = 0.0;
            for (std::size_t k = 0; k < e.tones(); ++k) rate += rate_ideal(b, e.snapshots[k], i, k);
            rate *= e.grid.spacing;
            auto per_tone_sum = [&](double (*bound)(const BoundInputs&)) {
                double sum = 0.0;
                for (std::size_t k = 0; k < e.tones(); ++k) {
                    BoundInputs in;
                    in.p = p;
                    in.r = e.snapshots[k].r;
                    in.d = d;
                    in.snr = b.snr(e.snapshots[k], i, k);
                    in.m_ratio = b.max_psd_ratio(p, i, k);
                    in.rho = std::max(1.0, in.m_ratio);
                    in.t = delta_entry_bound(in.r, d);
                    sum += bound(in);
                }
                return sum * e.grid.spacing;
            };
            t.add({"bound", num(d), num(i), num(rate),
                   cell("general", [&] { return per_tone_sum(&bound_general_per_tone); }),
                   cell("main", [&] { return main_bound_band(b, e, i, d); }),
                   cell("simplified", [&] { return per_tone_sum(&bound_simplified_per_tone); }),
                   cell("werner", [&] {
                       if (!w) throw Error(ErrorCode::BoundInapplicable, "no Werner parameters");
                       return bound_werner_decay(*w, d) * w->band;
                   }),
                   cell("relative", [&] {
                       if (!w) throw Error(ErrorCode::BoundInapplicable, "no Werner parameters");
                       return bound_relative(*w, d);
                   })});
        }
    }
    emit(t, s, c.out);
    return 0;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
    Table t;
    t.kind = "sweep";
    t.columns = {"row_type", "length_m", "alpha_ell", "gamma1", "gamma2", "spectral_floor_c", "zeta",
                 "bits", "d_analytic", "d_exact", "bound_at_bits", "error"};
    for (const auto& r : rows) {
        const auto& w = r.params;
        const auto& d = r.design;
        std::string err = r.error.value_or("");
        std::replace(err.begin(), err.end(), ',', ';');
        t.add({"length", num(r.length), num(w.alpha_ell), num(w.gamma1), num(w.gamma2), num(w.c),
               num(w.zeta_ell), d ? num(d->bits) : "", d ? num(d->d_analytic) : "", d ? num(d->d_exact) : "",
               d ? num(d->bound_at_bits) : "", err});
    }
    return t;
}

int print_design(const BitDesign& d, const char* what) {
    std::printf("%s\nbits: %d\nd_analytic: %.6f\nd_exact: %.6f\nbound_at_bits: %.6g <= target %.6g\n", what,
                d.bits, d.d_analytic, d.d_exact, d.bound_at_bits, d.target);
    for (const auto& n : d.notices) std::printf("note: %s\n", n.c_str());
    return 0;
}

int cmd_design(const Common& c, std::optional<long long> tone, std::optional<int> user) {
    const Scenario s = load(c);
    if (s.design.target_tone.has_value() == s.design.target_relative.has_value())
        throw Error(ErrorCode::InvalidParams, "give exactly one of --target-tone and --target-relative");
    const ChannelEnsemble e = build_ensemble(s);
    const LinkBudget b = bind_budget(s, e);

    if (s.design.target_relative) {
        const WernerBoundParams w = werner_bound_params(s, e, b);
        if (s.design.lengths.empty())
            return print_design(bits_for_relative_loss(w, *s.design.target_relative), "relative-loss design");
        const auto rows = sweep_bits_vs_loop_length(s.design.lengths, w, s.design.ref_length,
                                                    *s.design.target_relative);
        emit(sweep_table(rows), s, c.out);
        int worst = 0;
        for (const auto& r : rows)
            if (r.design) worst = std::max(worst, r.design->bits);
        std::fprintf(stderr, "max bits over lengths: %d\n", worst);
        return 0;
    }

    // Per-tone target: the word length that meets t on the requested tone, or
    // on every tone when none is named.
    const double t = *s.design.target_tone;
    std::vector<std::size_t> tones;
    if (tone) {
        if (*tone < 0 || static_cast<std::size_t>(*tone) >= e.tones())
            throw Error(ErrorCode::InvalidParams, "--tone out of range");
        tones.push_back(static_cast<std::size_t>(*tone));
    } else {
        tones.resize(e.tones());
        std::iota(tones.begin(), tones.end(), 0);
    }
    std::vector<int> users = user ? std::vector<int>{*user} : all_users(e);
    std::optional<BitDesign> worst;
    std::size_t worst_tone = 0;
    int worst_user = 0;
    for (std::size_t k : tones)
        for (int i : users) {
            if (i < 0 || i >= e.users()) throw Error(ErrorCode::InvalidParams, "--user out of range");
            BoundInputs in;
            in.p = e.users();
            in.r = e.snapshots[k].r;
            in.snr = b.snr(e.snapshots[k], i, k);
            in.rho = std::max(1.0, b.max_psd_ratio(in.p, i, k));
            BitDesign d = bits_for_tone_loss(in, t);
            if (!worst || d.bits > worst->bits) {
                worst = std::move(d);
                worst_tone = k;
                worst_user = i;
            }
        }
    std::printf("tone: %zu (%.17g Hz)\nuser: %d\n", worst_tone, e.grid.freq(worst_tone), worst_user);
    return print_design(*worst, "per-tone loss design");
}

int cmd_simulate(const Common& c, std::optional<int> d_single, bool per_tone) {
    const Scenario s = load(c);
    const ChannelEnsemble e = build_ensemble(s);
    const LinkBudget b = bind_budget(s, e);
    std::vector<int> ds;
    if (d_single) ds.push_back(*d_single);
    else
        for (int d = s.curve.d_min; d <= s.curve.d_max; ++d) ds.push_back(d);
    std::optional<CsiErrorModel> csi;
    if (s.trials.spec.csi_samples) csi = CsiErrorModel{*s.trials.spec.csi_samples};
    const TrialResult res = run_trial_curve(e, b, s.trials, ds, csi);

    std::optional<WernerBoundParams> w;
    try {
        w = werner_bound_params(s, e, b);
    } catch (const Error&) {
    }

    Table t;
    t.kind = "simulate";
    t.meta = {{"n_trials", num(s.trials.n_trials)},
              {"trials_used", num(res.trials_used)},
              {"statistic", s.trials.statistic == Statistic::WorstCase ? "worst_case"
                            : s.trials.statistic == Statistic::Mean   ? "mean"
                                                                      : "quantile " + num(s.trials.quantile)},
              {"csi_samples", csi ? num(csi->n_samples) : "none"}};
    t.columns = {"row_type", "d", "user", "tone", "freq_hz", "rate", "loss", "eta",
                 "loss_band_trials", "eta_band_trials", "bound_main", "bound_relative"};
    for (const auto& pt : res.points) {
        const std::string rel = [&]() -> std::string {
            if (!w) return "";
            try {
                return num(bound_relative(*w, pt.d_bits));
            } catch (const Error&) {
                return "";
            }
        }();
        for (std::size_t u = 0; u < res.users.size(); ++u) {
            const int i = res.users[u];
            std::string main;
            try {
                main = num(main_bound_band(b, e, i, pt.d_bits));
            } catch (const Error&) {
            }
            const BandLoss& band = pt.report.band[u];
            const BandLoss& bt = pt.band_trials[u];
            t.add({"band", num(pt.d_bits), num(i), "", "", num(band.rate), num(band.loss),
                   band.eta ? num(*band.eta) : "", num(bt.loss), bt.eta ? num(*bt.eta) : "", main, rel});
            if (!per_tone) continue;
            for (std::size_t k = 0; k < e.tones(); ++k) {
                const ToneLoss& tl = pt.report.per_tone[u][k];
                std::string tb;
                try {
                    tb = num(main_bound_at_tone(b, e.snapshots[k], i, k, pt.d_bits));
                } catch (const Error&) {
                }
                t.add({"tone", num(pt.d_bits), num(i), num(k), num(e.grid.freq(k)), num(tl.rate), num(tl.loss),
                       tl.rate > 0.0 ? num(tl.loss / tl.rate) : "", "", "", tb, ""});
            }
        }
        std::fprintf(stderr, "d %2d: worst eta %.6g%s%s\n", pt.d_bits, worst_relative_loss(pt),
                     rel.empty() ? "" : "  relative bound ", rel.c_str());
    }
    for (const auto& msg : res.skipped) std::fprintf(stderr, "skipped: %s\n", msg.c_str());
    emit(t, s, c.out);
    return 0;
}

int cmd_sweep(const Common& c, bool empirical) {
    Scenario s = load(c);
    if (s.design.lengths.empty()) s.design.lengths = {300.0, 600.0, 900.0, 1200.0};
    const double tau = s.design.target_relative.value_or(0.01);
    const ChannelEnsemble e = build_ensemble(s);
    const LinkBudget b = bind_budget(s, e);
    const WernerBoundParams w = werner_bound_params(s, e, b);
    const auto rows = sweep_bits_vs_loop_length(s.design.lengths, w, s.design.ref_length, tau);
    Table t = sweep_table(rows);
    t.meta = {{"tau", num(tau)}, {"ref_length_m", num(s.design.ref_length)}};
    if (empirical) {
        // Simulated counterpart: a channel synthesized at each length.
        t.columns.push_back("empirical_bits");
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Scenario at = s;
            at.channel.kind = ChannelConfig::Kind::Werner;
            at.channel.werner.loop_length_m = rows[r].length;
            const ChannelEnsemble el = build_ensemble(at);
            std::string cell;
            try {
                cell = num(min_bits_empirical(el, bind_budget(at, el), at.trials, tau));
            } catch (const Error& err) {
                if (err.code() != ErrorCode::TargetUnreachable) throw;
            }
            t.rows[r].push_back(cell);
        }
    }
    emit(t, s, c.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rate loss of quantized zero-forcing precoders in vectored DSL"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common synth, analyze, bound, design, simulate, sweep;
    std::string inspect_path, which = "all";
    bool zero = false, per_tone = false, empirical = false;
    std::optional<long long> tone;
    std::optional<int> user, d_single;

    auto* synth_cmd = app.add_subcommand("synth-channel", "synthesize a Werner channel file");
    add_channel_flags(synth_cmd, synth);
    synth_cmd->add_option("--out", synth.out, "output channel file")->required();

    auto* inspect_cmd = app.add_subcommand("inspect-channel", "summarize a channel file");
    inspect_cmd->add_option("file", inspect_path, "channel file")->required();

    auto perturbation_flags = [](CLI::App* a, Common& c, auto spec_of, bool with_d) {
        if (with_d)
            c.overrides.add<int>(a, "--d", "word length in bits",
                                 [spec_of](Scenario& s, const int& v) { spec_of(s).d_bits = v; });
        c.overrides.add<std::string>(a, "--e2", "quantization error model: rounding or uniform",
                                     [spec_of](Scenario& s, const std::string& v) {
                                         if (v != "rounding" && v != "uniform")
                                             throw Error(ErrorCode::InvalidParams, "--e2 must be rounding or uniform");
                                         spec_of(s).e2_model = v == "rounding" ? E2Model::DeterministicRounding
                                                                               : E2Model::UniformRandom;
                                     });
        c.overrides.add<std::uint64_t>(a, "--perturb-seed", "seed of the perturbation draws",
                                       [spec_of](Scenario& s, const std::uint64_t& v) { spec_of(s).seed = v; });
        c.overrides.add<int>(a, "--csi-samples", "channel estimated from N samples (adds E1)",
                             [spec_of](Scenario& s, const int& v) { spec_of(s).csi_samples = v; });
    };
    auto analysis_spec = [](Scenario& s) -> PerturbationSpec& { return s.perturbation; };
    auto trial_spec = [](Scenario& s) -> PerturbationSpec& { return s.trials.spec; };

    auto* analyze_cmd = app.add_subcommand("analyze", "exact loss of one quantized precoder");
    add_channel_flags(analyze_cmd, analyze);
    add_budget_flags(analyze_cmd, analyze);
    perturbation_flags(analyze_cmd, analyze, analysis_spec, true);
    analyze_cmd->add_flag("--zero-errors", zero, "use the exact precoder (all losses 0)");
    analyze_cmd->add_option("--out", analyze.out, "report file (stdout if absent)");

    auto* bound_cmd = app.add_subcommand("bound", "analytic bound curves over d");
    add_channel_flags(bound_cmd, bound);
    add_budget_flags(bound_cmd, bound);
    add_curve_flags(bound_cmd, bound);
    add_werner_fit_flags(bound_cmd, bound);
    bound_cmd->add_option("--which", which, "general, main, simplified, werner, relative or all")
        ->check(CLI::IsMember({"general", "main", "simplified", "werner", "relative", "all"}));
    bound_cmd->add_option("--out", bound.out, "report file (stdout if absent)");

    auto* design_cmd = app.add_subcommand("design-bits", "minimum word length for a loss target");
    add_channel_flags(design_cmd, design);
    add_budget_flags(design_cmd, design);
    add_werner_fit_flags(design_cmd, design);
    design.overrides.add<double>(design_cmd, "--target-tone", "per-tone loss target t in bits",
                                 [](Scenario& s, const double& v) {
                                     s.design.target_tone = v;
                                     s.design.target_relative.reset();
                                 });
    design.overrides.add<double>(design_cmd, "--target-relative", "band relative loss target tau",
                                 [](Scenario& s, const double& v) {
                                     s.design.target_relative = v;
                                     s.design.target_tone.reset();
                                 });
    design.overrides.add<std::vector<double>>(design_cmd, "--lengths", "sweep these loop lengths (m)",
                                              [](Scenario& s, const std::vector<double>& v) { s.design.lengths = v; });
    design.overrides.add<double>(design_cmd, "--ref-length", "length at which the Werner fit holds (m)",
                                 [](Scenario& s, const double& v) { s.design.ref_length = v; });
    design_cmd->add_option("--tone", tone, "design for this tone only");
    design_cmd->add_option("--user", user, "design for this user only");
    design_cmd->add_option("--out", design.out, "sweep report file (stdout if absent)");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo loss versus d");
    add_channel_flags(sim_cmd, simulate);
    add_budget_flags(sim_cmd, simulate);
    add_curve_flags(sim_cmd, simulate);
    add_werner_fit_flags(sim_cmd, simulate);
    perturbation_flags(sim_cmd, simulate, trial_spec, false);
    sim_cmd->add_option("--d", d_single, "single word length instead of the curve");
    simulate.overrides.add<int>(sim_cmd, "--trials", "number of trials",
                                [](Scenario& s, const int& v) { s.trials.n_trials = v; });
    simulate.overrides.add<std::string>(sim_cmd, "--statistic", "worst_case, mean or quantile",
                                        [](Scenario& s, const std::string& v) {
                                            if (v == "worst_case") s.trials.statistic = Statistic::WorstCase;
                                            else if (v == "mean") s.trials.statistic = Statistic::Mean;
                                            else if (v == "quantile") s.trials.statistic = Statistic::Quantile;
                                            else throw Error(ErrorCode::InvalidParams, "unknown statistic '" + v + "'");
                                        });
    simulate.overrides.add<double>(sim_cmd, "--quantile", "quantile level for --statistic quantile",
                                   [](Scenario& s, const double& v) { s.trials.quantile = v; });
    simulate.overrides.flag(sim_cmd, "--skip-failures", "drop failing trials instead of aborting",
                            [](Scenario& s) { s.trials.skip_failures = true; });
    simulate.overrides.flag(sim_cmd, "--zero-errors", "force all perturbations to zero",
                            [](Scenario& s) { s.trials.zero_errors = true; });
    sim_cmd->add_flag("--per-tone", per_tone, "also emit per-tone rows");
    sim_cmd->add_option("--out", simulate.out, "report file (stdout if absent)");

    auto* sweep_cmd = app.add_subcommand("sweep", "bits versus loop length for a relative target");
    add_channel_flags(sweep_cmd, sweep);
    add_budget_flags(sweep_cmd, sweep);
    add_werner_fit_flags(sweep_cmd, sweep);
    sweep.overrides.add<std::vector<double>>(sweep_cmd, "--lengths", "loop lengths (m)",
                                             [](Scenario& s, const std::vector<double>& v) { s.design.lengths = v; });
    sweep.overrides.add<double>(sweep_cmd, "--tau", "relative loss target",
                                [](Scenario& s, const double& v) { s.design.target_relative = v; });
    sweep.overrides.add<double>(sweep_cmd, "--ref-length", "length at which the Werner fit holds (m)",
                                [](Scenario& s, const double& v) { s.design.ref_length = v; });
    sweep.overrides.add<int>(sweep_cmd, "--trials", "trials per length for --empirical",
                             [](Scenario& s, const int& v) { s.trials.n_trials = v; });
    sweep_cmd->add_flag("--empirical", empirical, "add simulated minimum bits per length");
    sweep_cmd->add_option("--out", sweep.out, "report file (stdout if absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth);
        if (*inspect_cmd) return cmd_inspect(inspect_path);
        if (*analyze_cmd) return cmd_analyze(analyze, zero);
        if (*bound_cmd) return cmd_bound(bound, which);
        if (*design_cmd) return cmd_design(design, tone, user);
        if (*sim_cmd) return cmd_simulate(simulate, d_single, per_tone);
        if (*sweep_cmd) return cmd_sweep(sweep, empirical);
    } catch (const BitDepthTooSmall& e) {
        std::fprintf(stderr, "error: %s\nminimum admissible d: %d\n", e.what(), e.min_bits());
        return exit_code(e.code());
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
