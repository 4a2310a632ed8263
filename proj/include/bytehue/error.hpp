// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bytehue {

/// Every failure the library reports. The enumerator name is the stable,
/// machine-readable code surfaced by the CLI (`--json`) and the REST API.
enum class ErrorCode {
    // hex / bytecode
    Empty,
    OddLength,
    NonHexCharacter,
    TooLarge,
    // upstream API
    NotFound,
    NetworkError,
    RateLimited,
    AuthMissing,
    // dataset
    UnknownLabel,
    EmptyDataset,
    DegenerateSplit,
    IoError,
    SchemaVersionMismatch,
    CorruptRecord,
    // encoder
    InconsistentLength,
    UnsupportedPngVariant,
    // network engine
    InvalidConfig,
    ShapeMismatch,
    ArityMismatch,
    StaleCache,
    TooLargeForOracle,
    InvalidEpsilon,
    // training
    EmptyTrainSet,
    DivergenceDetected,
    FreezeIndexInvalid,
    HeadArityMismatch,
    EmptySplit,
    ModelIncompatible,
    // bundle / service
    ChecksumMismatch,
    MagicMismatch,
    InvalidRequest,
    BindFailure,
};

inline constexpr int kErrorCodeCount = static_cast<int>(ErrorCode::BindFailure) + 1;

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::OddLength: return "OddLength";
    case ErrorCode::NonHexCharacter: return "NonHexCharacter";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::InconsistentLength: return "InconsistentLength";
    case ErrorCode::UnsupportedPngVariant: return "UnsupportedPngVariant";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::FreezeIndexInvalid: return "FreezeIndexInvalid";
    case ErrorCode::HeadArityMismatch: return "HeadArityMismatch";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::ModelIncompatible: return "ModelIncompatible";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::BindFailure: return "BindFailure";
    }
    return "Unknown";
}

/// Exception carrying an ErrorCode. `position` holds a character index
/// (NonHexCharacter) or a 1-based line number (CorruptRecord) when relevant.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message, long long position = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        position_(position)
    {}

    ErrorCode code() const noexcept { return code_; }
    long long position() const noexcept { return position_; }

private:
    ErrorCode code_;
    long long position_;
};

}  // namespace bytehue
