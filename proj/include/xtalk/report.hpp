// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xtalk/channel_model.hpp"
#include "xtalk/monte_carlo.hpp"
#include "xtalk/rate_analysis.hpp"

namespace xtalk {

inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// A CSV table with '#'-prefixed header lines:
///   # format: xtalk-report
///   # format_version: 1
///   # tool_version: ...
///   # kind: <kind>
///   # scenario_hash: <16 hex digits>
///   # <extra meta lines>
/// followed by a column header and rows. The first column is always row_type.
struct Table {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Appends a row; throws InvalidParams if its width differs from columns.
    void add(std::vector<std::string> row);
};

/// %.17g, with "nan", "inf" and "-inf" spelled out.
std::string num(double v);
std::string num(long long v);
inline std::string num(int v) { return num(static_cast<long long>(v)); }
inline std::string num(std::size_t v) { return num(static_cast<long long>(v)); }

std::string hex64(std::uint64_t v);

std::string format_table(const Table& table, std::uint64_t scenario_hash);
void write_table(const Table& table, std::uint64_t scenario_hash, const std::string& path);

/// One "tone" row per user and tone plus one "band" row per user.
Table loss_table(const LossReport& report, const ChannelEnsemble& ensemble, const std::vector<int>& users);

}  // namespace xtalk
