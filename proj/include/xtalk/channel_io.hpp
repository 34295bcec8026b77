// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "xtalk/channel_model.hpp"

namespace xtalk {

/// Version written into, and required from, the "format_version" field.
inline constexpr int kChannelFormatVersion = 1;

/// Reads a channel file (grammar in docs/channel-format.md). Throws ParseError
/// for malformed input and SingularDiagonal for a zero diagonal entry.
ChannelEnsemble load_channel(const std::string& path);
ChannelEnsemble parse_channel(const std::string& text, const std::string& origin = "<memory>");

/// Writes every tone of the ensemble. Numbers use shortest round-trip
/// formatting so load_channel(save_channel(e)) reproduces e bit-exactly.
void save_channel(const ChannelEnsemble& ensemble, const std::string& path);
std::string format_channel(const ChannelEnsemble& ensemble);

/// Writes per-tone matrices other than channels (e.g. precoders) in the same
/// grammar, tagged with `kind`.
std::string format_matrices(const ToneGrid& grid, const std::vector<CMatrix>& matrices,
                            const std::string& kind);

}  // namespace xtalk
