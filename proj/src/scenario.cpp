// SPDX-License-Identifier: Apache-2.0
#include "xtalk/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "xtalk/channel_io.hpp"

namespace xtalk {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object, remembering which were consumed so
// leftovers can be reported as unknown.
class Fields {
public:
    Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) fail("expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            fail(std::string(key) + ": " + e.what());
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return;
        T v{};
        get(key, v);
        out = v;
    }

    const json* child(const char* key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    std::string where(const char* key) const { return where_ + "." + key; }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::InvalidParams, where_ + ": " + what);
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

template <class E>
E enum_from(const Fields& f, const std::string& name, std::initializer_list<std::pair<const char*, E>> map) {
    for (const auto& [n, v] : map)
        if (name == n) return v;
    std::string options;
    for (const auto& [n, v] : map) options += std::string(options.empty() ? "" : ", ") + n;
    f.fail("'" + name + "' is not one of " + options);
}

const char* phase_name(PhaseMode m) { return m == PhaseMode::Zero ? "zero" : "uniform"; }
const char* e2_name(E2Model m) { return m == E2Model::DeterministicRounding ? "rounding" : "uniform"; }
const char* statistic_name(Statistic s) {
    switch (s) {
        case Statistic::WorstCase: return "worst_case";
        case Statistic::Mean: return "mean";
        case Statistic::Quantile: return "quantile";
    }
    return "?";
}

void read_channel(const json& j, ChannelConfig& c) {
    Fields f(j, "channel");
    std::string source = c.kind == ChannelConfig::Kind::Werner ? "werner" : "file";
    f.get("source", source);
    c.kind = enum_from<ChannelConfig::Kind>(
        f, source, {{"werner", ChannelConfig::Kind::Werner}, {"file", ChannelConfig::Kind::File}});
    f.get("path", c.path);
    f.get("seed", c.seed);
    f.get("decimate", c.decimate);
    if (const json* w = f.child("werner")) {
        Fields g(*w, f.where("werner"));
        g.get("alpha", c.werner.alpha);
        g.get("loop_length_m", c.werner.loop_length_m);
        g.get("k_mean_slope", c.werner.k_mean_slope);
        g.get("k_sigma_log", c.werner.k_sigma_log);
        g.get("p", c.werner.p);
        g.finish();
    }
    if (const json* gj = f.child("grid")) {
        Fields g(*gj, f.where("grid"));
        g.get("f_start", c.grid.f_start);
        g.get("f_end", c.grid.f_end);
        g.get("spacing", c.grid.spacing);
        g.finish();
    }
    if (const json* sj = f.child("synthesis")) {
        Fields g(*sj, f.where("synthesis"));
        std::string dp = phase_name(c.synthesis.diagonal_phase);
        std::string op = phase_name(c.synthesis.offdiagonal_phase);
        std::string pol = c.synthesis.dominance_policy == DominancePolicy::Warn ? "warn" : "fail";
        g.get("diagonal_phase", dp);
        g.get("offdiagonal_phase", op);
        g.get("dominance_ceiling", c.synthesis.dominance_ceiling);
        g.get("dominance_policy", pol);
        g.finish();
        const std::initializer_list<std::pair<const char*, PhaseMode>> modes = {{"zero", PhaseMode::Zero},
                                                                               {"uniform", PhaseMode::Uniform}};
        c.synthesis.diagonal_phase = enum_from<PhaseMode>(g, dp, modes);
        c.synthesis.offdiagonal_phase = enum_from<PhaseMode>(g, op, modes);
        c.synthesis.dominance_policy = enum_from<DominancePolicy>(
            g, pol, {{"warn", DominancePolicy::Warn}, {"fail", DominancePolicy::Fail}});
    }
    f.finish();
}

void read_budget(const json& j, LinkBudget& b) {
    Fields f(j, "budget");
    if (const json* psd = f.child("psd_dbm_hz")) {
        if (psd->is_number()) b.psd_dbm_hz = {psd->get<double>()};
        else f.get("psd_dbm_hz", b.psd_dbm_hz);
    }
    f.get("psd_table_dbm_hz", b.psd_table_dbm_hz);
    f.get("noise_psd_dbm_hz", b.noise_psd_dbm_hz);
    f.get("gamma_gap_db", b.gamma_gap_db);
    f.finish();
}

void read_perturbation(const json& j, PerturbationSpec& s, const char* where) {
    Fields f(j, where);
    f.get("d_bits", s.d_bits);
    f.get("csi_samples", s.csi_samples);
    f.get("seed", s.seed);
    std::string model = e2_name(s.e2_model);
    f.get("e2_model", model);
    s.e2_model = enum_from<E2Model>(
        f, model, {{"rounding", E2Model::DeterministicRounding}, {"uniform", E2Model::UniformRandom}});
    f.finish();
}

void read_trials(const json& j, TrialConfig& t) {
    Fields f(j, "trials");
    f.get("n_trials", t.n_trials);
    f.get("users", t.users);
    std::string stat = statistic_name(t.statistic);
    f.get("statistic", stat);
    t.statistic = enum_from<Statistic>(f, stat,
                                       {{"worst_case", Statistic::WorstCase},
                                        {"mean", Statistic::Mean},
                                        {"quantile", Statistic::Quantile}});
    f.get("quantile", t.quantile);
    f.get("skip_failures", t.skip_failures);
    f.get("zero_errors", t.zero_errors);
    if (const json* pj = f.child("perturbation")) read_perturbation(*pj, t.spec, "trials.perturbation");
    f.finish();
}

json to_json(const Scenario& s) {
    const auto& c = s.channel;
    json channel = {
        {"source", c.kind == ChannelConfig::Kind::Werner ? "werner" : "file"},
        {"path", c.path},
        {"seed", c.seed},
        {"decimate", c.decimate},
        {"werner",
         {{"alpha", c.werner.alpha},
          {"loop_length_m", c.werner.loop_length_m},
          {"k_mean_slope", c.werner.k_mean_slope},
          {"k_sigma_log", c.werner.k_sigma_log},
          {"p", c.werner.p}}},
        {"grid", {{"f_start", c.grid.f_start}, {"f_end", c.grid.f_end}, {"spacing", c.grid.spacing}}},
        {"synthesis",
         {{"diagonal_phase", phase_name(c.synthesis.diagonal_phase)},
          {"offdiagonal_phase", phase_name(c.synthesis.offdiagonal_phase)},
          {"dominance_ceiling", c.synthesis.dominance_ceiling},
          {"dominance_policy", c.synthesis.dominance_policy == DominancePolicy::Warn ? "warn" : "fail"}}}};
    auto perturbation = [](const PerturbationSpec& p) {
        json out = {{"d_bits", p.d_bits}, {"seed", p.seed}, {"e2_model", e2_name(p.e2_model)}};
        out["csi_samples"] = p.csi_samples ? json(*p.csi_samples) : json(nullptr);
        return out;
    };
    json doc = {
        {"format", "xtalk-scenario"},
        {"format_version", kScenarioFormatVersion},
        {"channel", channel},
        {"budget",
         {{"psd_dbm_hz", s.budget.psd_dbm_hz},
          {"psd_table_dbm_hz", s.budget.psd_table_dbm_hz},
          {"noise_psd_dbm_hz", s.budget.noise_psd_dbm_hz},
          {"gamma_gap_db", s.budget.gamma_gap_db}}},
        {"perturbation", perturbation(s.perturbation)},
        {"trials",
         {{"n_trials", s.trials.n_trials},
          {"users", s.trials.users},
          {"statistic", statistic_name(s.trials.statistic)},
          {"quantile", s.trials.quantile},
          {"skip_failures", s.trials.skip_failures},
          {"zero_errors", s.trials.zero_errors},
          {"perturbation", perturbation(s.trials.spec)}}},
        {"curve", {{"d_min", s.curve.d_min}, {"d_max", s.curve.d_max}}},
        {"design",
         {{"target_tone", s.design.target_tone ? json(*s.design.target_tone) : json(nullptr)},
          {"target_relative", s.design.target_relative ? json(*s.design.target_relative) : json(nullptr)},
          {"lengths", s.design.lengths},
          {"ref_length", s.design.ref_length}}}};
    if (s.werner_fit)
        doc["werner_fit"] = {{"alpha_ell", s.werner_fit->alpha_ell},
                             {"gamma1", s.werner_fit->gamma1},
                             {"gamma2", s.werner_fit->gamma2}};
    else
        doc["werner_fit"] = nullptr;
    return doc;
}

}  // namespace

void Scenario::validate() const {
    channel.grid.validate();
    if (channel.decimate < 1) throw Error(ErrorCode::InvalidParams, "channel.decimate must be >= 1");
    if (channel.kind == ChannelConfig::Kind::Werner) channel.werner.validate();
    else if (channel.path.empty()) throw Error(ErrorCode::InvalidParams, "channel.path is required for a file source");
    if (!(channel.synthesis.dominance_ceiling > 0.0))
        throw Error(ErrorCode::InvalidParams, "channel.synthesis.dominance_ceiling must be positive");
    perturbation.validate();
    trials.validate();
    if (curve.d_min < 1 || curve.d_max > 52 || curve.d_min > curve.d_max)
        throw Error(ErrorCode::InvalidParams, "curve needs 1 <= d_min <= d_max <= 52");
    if (design.target_tone && !(*design.target_tone > 0.0))
        throw Error(ErrorCode::InvalidParams, "design.target_tone must be positive");
    if (design.target_relative && !(*design.target_relative > 0.0 && *design.target_relative < 1.0))
        throw Error(ErrorCode::InvalidParams, "design.target_relative must lie in (0, 1)");
    for (double l : design.lengths)
        if (!(l > 0.0)) throw Error(ErrorCode::InvalidParams, "design.lengths must be positive");
    if (!(design.ref_length > 0.0)) throw Error(ErrorCode::InvalidParams, "design.ref_length must be positive");
    if (werner_fit && (!(werner_fit->alpha_ell > 0.0) || werner_fit->gamma1 < 0.0 || werner_fit->gamma2 < 0.0))
        throw Error(ErrorCode::InvalidParams, "werner_fit needs alpha_ell > 0 and nonnegative gammas");
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(0, origin + ": " + e.what());
    }
    Scenario s;
    try {
        Fields f(doc, "scenario");
        std::string format = "xtalk-scenario";
        int version = kScenarioFormatVersion;
        f.get("format", format);
        f.get("format_version", version);
        if (format != "xtalk-scenario") f.fail("format must be 'xtalk-scenario'");
        if (version != kScenarioFormatVersion)
            f.fail("unsupported format_version " + std::to_string(version));
        if (const json* j = f.child("channel")) read_channel(*j, s.channel);
        if (const json* j = f.child("budget")) read_budget(*j, s.budget);
        if (const json* j = f.child("perturbation")) read_perturbation(*j, s.perturbation, "perturbation");
        if (const json* j = f.child("trials")) read_trials(*j, s.trials);
        if (const json* j = f.child("curve")) {
            Fields g(*j, "curve");
            g.get("d_min", s.curve.d_min);
            g.get("d_max", s.curve.d_max);
            g.finish();
        }
        if (const json* j = f.child("design")) {
            Fields g(*j, "design");
            g.get("target_tone", s.design.target_tone);
            g.get("target_relative", s.design.target_relative);
            g.get("lengths", s.design.lengths);
            g.get("ref_length", s.design.ref_length);
            g.finish();
        }
        if (const json* j = f.child("werner_fit")) {
            WernerFit w;
            Fields g(*j, "werner_fit");
            g.get("alpha_ell", w.alpha_ell);
            g.get("gamma1", w.gamma1);
            g.get("gamma2", w.gamma2);
            g.finish();
            s.werner_fit = w;
        }
        f.finish();
    } catch (const Error& e) {
        // Re-tag as ParseError without stacking the inner code name.
        std::string msg = e.what();
        const std::string tag = std::string(to_string(e.code())) + ": ";
        if (msg.starts_with(tag)) msg.erase(0, tag.size());
        throw ParseError(0, origin + ": " + msg);
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

std::string format_scenario(const Scenario& scenario) { return to_json(scenario).dump(2) + "\n"; }

std::uint64_t scenario_hash(const Scenario& scenario) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json(scenario).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ChannelEnsemble build_ensemble(const Scenario& scenario) {
    scenario.validate();
    const auto& c = scenario.channel;
    if (c.kind == ChannelConfig::Kind::Werner)
        return synthesize_channel(c.werner, c.grid.decimated(c.decimate), c.seed, c.synthesis);
    ChannelEnsemble e = load_channel(c.path);
    if (c.decimate > 1) {
        ChannelEnsemble out;
        out.grid = e.grid.decimated(c.decimate);
        out.source = e.source;
        out.warnings = e.warnings;
        for (std::size_t k = 0; k < out.grid.count(); ++k) {
            out.snapshots.push_back(std::move(e.snapshots[k * c.decimate]));
            out.snapshots.back().freq = out.grid.freq(k);
        }
        return out;
    }
    return e;
}

LinkBudget bind_budget(const Scenario& scenario, const ChannelEnsemble& ensemble) {
    LinkBudget b = scenario.budget;
    b.grid = ensemble.grid;
    b.validate(ensemble.users());
    return b;
}

WernerBoundParams werner_bound_params(const Scenario& scenario, const ChannelEnsemble& ensemble,
                                      const LinkBudget& budget) {
    double alpha_ell = 0.0;
    RowDominanceFit fit;
    if (scenario.werner_fit) {
        alpha_ell = scenario.werner_fit->alpha_ell;
        fit.gamma1 = scenario.werner_fit->gamma1;
        fit.gamma2 = scenario.werner_fit->gamma2;
    } else {
        alpha_ell = fit_alpha(ensemble);
        fit = fit_row_dominance(ensemble);
    }
    return make_werner_bound_params(alpha_ell, fit, ensemble.users(), budget, ensemble.grid.f_end);
}

}  // namespace xtalk
