// SPDX-License-Identifier: Apache-2.0
#include "xtalk/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace xtalk {

void Table::add(std::vector<std::string> row) {
    if (row.size() != columns.size())
        throw Error(ErrorCode::InvalidParams, "row has " + std::to_string(row.size()) + " cells, table has " +
                                                  std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string num(long long v) { return std::to_string(v); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_table(const Table& table, std::uint64_t scenario_hash) {
    std::ostringstream os;
    os << "# format: xtalk-report\n"
       << "# format_version: " << kReportFormatVersion << "\n"
       << "# tool_version: " << kToolVersion << "\n"
       << "# kind: " << table.kind << "\n"
       << "# scenario_hash: " << hex64(scenario_hash) << "\n";
    for (const auto& [k, v] : table.meta) os << "# " << k << ": " << v << "\n";
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << "\n";
    };
    line(table.columns);
    for (const auto& r : table.rows) line(r);
    return os.str();
}

void write_table(const Table& table, std::uint64_t scenario_hash, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidParams, "cannot write '" + path + "'");
    out << format_table(table, scenario_hash);
    if (!out) throw Error(ErrorCode::InvalidParams, "write to '" + path + "' failed");
}

Table loss_table(const LossReport& report, const ChannelEnsemble& ensemble, const std::vector<int>& users) {
    Table t;
    t.kind = "loss";
    t.columns = {"row_type", "user", "tone", "freq_hz", "rate", "loss", "eta", "a", "q", "k"};
    for (std::size_t u = 0; u < users.size(); ++u) {
        const auto& tones = report.per_tone.at(u);
        for (std::size_t k = 0; k < tones.size(); ++k) {
            const ToneLoss& tl = tones[k];
            t.add({"tone", num(users[u]), num(k), num(ensemble.grid.freq(k)), num(tl.rate), num(tl.loss),
                   tl.rate > 0.0 ? num(tl.loss / tl.rate) : "", num(tl.a), num(tl.q), num(tl.k)});
        }
        const BandLoss& b = report.band.at(u);
        t.add({"band", num(users[u]), "", "", num(b.rate), num(b.loss), b.eta ? num(*b.eta) : "", "", "", ""});
    }
    return t;
}

}  // namespace xtalk
