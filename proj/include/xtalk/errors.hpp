// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xtalk {

enum class ErrorCode {
    InvalidParams,
    DominanceViolation,
    ParseError,
    SingularDiagonal,
    InsufficientData,
    SingularChannel,
    RangeError,
    InvalidBudget,
    NumericalError,
    RelativeLossUndefined,
    BoundInapplicable,
    BitDepthTooSmall,
    FloorNonpositive,
    TargetUnreachable,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Process exit status for an error: 2 configuration or input, 3 numerical
/// or channel, 4 bound precondition.
int exit_code(ErrorCode code) noexcept;

/// Base of every error thrown by the library. The code is stable and is what
/// callers (and the CLI exit-code mapping) should branch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when a tone's channel (or a perturbed variant of it) cannot be
/// inverted to working precision.
class SingularChannel : public Error {
public:
    static constexpr std::size_t kNoTone = static_cast<std::size_t>(-1);

    SingularChannel(std::size_t tone, const std::string& what)
        : Error(ErrorCode::SingularChannel, what), tone_(tone) {}

    std::size_t tone() const noexcept { return tone_; }

private:
    std::size_t tone_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorCode::ParseError, what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// The word length is below the floor d >= 1/2 + log2(1 + r) under which the
/// main per-tone bound is not defined.
class BitDepthTooSmall : public Error {
public:
    BitDepthTooSmall(int min_bits, const std::string& what)
        : Error(ErrorCode::BitDepthTooSmall, what), min_bits_(min_bits) {}

    int min_bits() const noexcept { return min_bits_; }

private:
    int min_bits_;
};

}  // namespace xtalk
