// SPDX-License-Identifier: Apache-2.0
#include "xtalk/errors.hpp"

namespace xtalk {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::DominanceViolation: return "DominanceViolation";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SingularDiagonal: return "SingularDiagonal";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::SingularChannel: return "SingularChannel";
        case ErrorCode::RangeError: return "RangeError";
        case ErrorCode::InvalidBudget: return "InvalidBudget";
        case ErrorCode::NumericalError: return "NumericalError";
        case ErrorCode::RelativeLossUndefined: return "RelativeLossUndefined";
        case ErrorCode::BoundInapplicable: return "BoundInapplicable";
        case ErrorCode::BitDepthTooSmall: return "BitDepthTooSmall";
        case ErrorCode::FloorNonpositive: return "FloorNonpositive";
        case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    }
    return "Unknown";
}

int exit_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidParams:
        case ErrorCode::DominanceViolation:
        case ErrorCode::ParseError:
        case ErrorCode::InvalidBudget:
            return 2;
        case ErrorCode::SingularDiagonal:
        case ErrorCode::InsufficientData:
        case ErrorCode::SingularChannel:
        case ErrorCode::RangeError:
        case ErrorCode::NumericalError:
            return 3;
        case ErrorCode::RelativeLossUndefined:
        case ErrorCode::BoundInapplicable:
        case ErrorCode::BitDepthTooSmall:
        case ErrorCode::FloorNonpositive:
        case ErrorCode::TargetUnreachable:
            return 4;
    }
    return 3;
}

}  // namespace xtalk
