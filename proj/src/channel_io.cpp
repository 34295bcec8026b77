// SPDX-License-Identifier: Apache-2.0
#include "xtalk/channel_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace xtalk {

using nlohmann::json;

namespace {

const char* phase_name(PhaseMode m) { return m == PhaseMode::Zero ? "zero" : "uniform"; }

json source_json(const ChannelSource& source) {
    if (const auto* syn = std::get_if<SynthesizedSource>(&source)) {
        const auto& w = syn->params;
        return {{"type", "werner"},
                {"alpha", w.alpha},
                {"loop_length_m", w.loop_length_m},
                {"k_mean_slope", w.k_mean_slope},
                {"k_sigma_log", w.k_sigma_log},
                {"seed", syn->seed},
                {"diagonal_phase", phase_name(syn->options.diagonal_phase)},
                {"offdiagonal_phase", phase_name(syn->options.offdiagonal_phase)}};
    }
    return {{"type", "file"}, {"path", std::get<LoadedSource>(source).path}};
}

json matrix_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            rows.push_back({m(i, j).real(), m(i, j).imag()});
    return rows;
}

std::string dump(const ToneGrid& grid, const std::vector<CMatrix>& matrices, const std::string& kind,
                 const json& source) {
    const auto p = matrices.empty() ? 0 : matrices.front().rows();
    json doc = {{"format", "xtalk-channel"},
                {"format_version", kChannelFormatVersion},
                {"kind", kind},
                {"p", p},
                {"tone_count", matrices.size()},
                {"f_start", grid.f_start},
                {"spacing", grid.spacing}};
    if (!source.is_null()) doc["source"] = source;
    json tones = json::array();
    for (std::size_t k = 0; k < matrices.size(); ++k)
        tones.push_back({{"freq", grid.freq(k)}, {"H", matrix_json(matrices[k])}});
    doc["tones"] = std::move(tones);
    return doc.dump(1) + "\n";
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ParseError(0, origin + ": " + what);
}

double number(const json& j, const char* key, const std::string& origin) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) fail(origin, std::string("missing numeric field '") + key + "'");
    const double v = it->get<double>();
    if (!std::isfinite(v)) fail(origin, std::string("non-finite field '") + key + "'");
    return v;
}

}  // namespace

std::string format_matrices(const ToneGrid& grid, const std::vector<CMatrix>& matrices,
                            const std::string& kind) {
    return dump(grid, matrices, kind, json());
}

std::string format_channel(const ChannelEnsemble& ensemble) {
    std::vector<CMatrix> hs;
    hs.reserve(ensemble.snapshots.size());
    for (const auto& s : ensemble.snapshots) hs.push_back(s.h);
    return dump(ensemble.grid, hs, "channel", source_json(ensemble.source));
}

void save_channel(const ChannelEnsemble& ensemble, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidParams, "cannot open '" + path + "' for writing");
    out << format_channel(ensemble);
    if (!out) throw Error(ErrorCode::InvalidParams, "write to '" + path + "' failed");
}

ChannelEnsemble parse_channel(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError(line, origin + ":" + std::to_string(line) + ": " + e.what());
    }
    if (!doc.is_object()) fail(origin, "top level must be an object");
    if (doc.value("format", std::string()) != "xtalk-channel")
        fail(origin, "field 'format' must be \"xtalk-channel\"");
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer() ||
        doc["format_version"].get<int>() != kChannelFormatVersion)
        fail(origin, "unsupported format_version (expected " +
                         std::to_string(kChannelFormatVersion) + ")");

    const double pd = number(doc, "p", origin);
    const double nd = number(doc, "tone_count", origin);
    if (pd < 1 || pd != std::floor(pd)) fail(origin, "'p' must be a positive integer");
    if (nd < 1 || nd != std::floor(nd)) fail(origin, "'tone_count' must be a positive integer");
    const auto p = static_cast<Eigen::Index>(pd);
    const auto n = static_cast<std::size_t>(nd);

    ToneGrid grid;
    grid.f_start = number(doc, "f_start", origin);
    grid.spacing = number(doc, "spacing", origin);
    if (grid.f_start < 0.0 || !(grid.spacing > 0.0)) fail(origin, "invalid f_start/spacing");
    grid.f_end = n == 1 ? grid.f_start + 0.5 * grid.spacing
                        : grid.f_start + static_cast<double>(n - 1) * grid.spacing;

    auto tones = doc.find("tones");
    if (tones == doc.end() || !tones->is_array()) fail(origin, "missing array 'tones'");
    if (tones->size() != n)
        fail(origin, "tone_count " + std::to_string(n) + " but " + std::to_string(tones->size()) +
                         " tone records");

    ChannelEnsemble ens;
    ens.grid = grid;
    ens.source = LoadedSource{origin};
    ens.snapshots.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const json& t = (*tones)[k];
        const std::string where = "tone " + std::to_string(k);
        if (!t.is_object()) fail(origin, where + ": record must be an object");
        const double f = number(t, "freq", origin + " " + where);
        if (std::abs(f - grid.freq(k)) > 1e-6 * grid.spacing)
            fail(origin, where + ": freq does not match f_start + k * spacing");
        auto hj = t.find("H");
        if (hj == t.end() || !hj->is_array() || hj->size() != static_cast<std::size_t>(p * p))
            fail(origin, where + ": 'H' must hold p*p [re, im] pairs");
        CMatrix h(p, p);
        for (Eigen::Index e = 0; e < p * p; ++e) {
            const json& c = (*hj)[static_cast<std::size_t>(e)];
            if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
                fail(origin, where + ": entry " + std::to_string(e) + " is not [re, im]");
            h(e / p, e % p) = cplx(c[0].get<double>(), c[1].get<double>());
        }
        if (!h.allFinite()) fail(origin, where + ": non-finite entry");
        ens.snapshots.push_back(ChannelSnapshot::from_matrix(grid.freq(k), std::move(h), k));
    }
    return ens;
}

ChannelEnsemble load_channel(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_channel(buf.str(), path);
}

}  // namespace xtalk
