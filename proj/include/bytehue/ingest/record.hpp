// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "bytehue/error.hpp"
#include "bytehue/hex.hpp"

namespace bytehue::ingest {

using LabelVector = std::vector<std::uint8_t>;
using Timestamp = std::chrono::sys_seconds;

/// 20-byte account address.
struct Address
{
    std::array<std::uint8_t, 20> bytes{};

    static Address parse(std::string_view text)
    {
        auto s = text;
        if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
            s.remove_prefix(2);
        if (s.size() != 40)
            throw Error(ErrorCode::InvalidRequest, "address must have 40 hex digits: '" + std::string(text) + "'");
        Address a;
        for (std::size_t i = 0; i < 20; ++i)
        {
            const int hi = bytehue::detail::hex_value(s[2 * i]), lo = bytehue::detail::hex_value(s[2 * i + 1]);
            if (hi < 0 || lo < 0)
                throw Error(ErrorCode::InvalidRequest, "address has a non-hex character: '" + std::string(text) + "'");
            a.bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
        }
        return a;
    }

    /// Lowercase with "0x" prefix.
    std::string to_string() const { return "0x" + to_hex(bytes); }

    friend bool operator==(const Address&, const Address&) = default;
};

/// The seven compiler bug names mentioned by name in the original study.
/// Load a vocabulary file to use the full official list.
inline const std::vector<std::string>& default_bug_names()
{
    static const std::vector<std::string> names = {
        "optimizerStateKnowledgeNotResetForJumpdest",
        "ArrayAccessCleanHigherOrderBits",
        "AncientCompiler",
        "SolidFunSelectSelector",
        "DelegateCallReturnValue",
        "ECRecoverMalformedInput",
        "SkipEmptyStringLiteral",
    };
    return names;
}

class LabelVocabulary
{
public:
    LabelVocabulary() : LabelVocabulary(default_bug_names(), "bytehue-default-7") {}

    LabelVocabulary(std::vector<std::string> names, std::string version)
      : names_(std::move(names)), version_(std::move(version))
    {
        std::unordered_set<std::string> seen;
        for (const auto& n : names_)
        {
            if (n.empty())
                throw Error(ErrorCode::InvalidConfig, "vocabulary contains an empty label name");
            if (!seen.insert(n).second)
                throw Error(ErrorCode::InvalidConfig, "vocabulary contains '" + n + "' twice");
        }
    }

    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& version() const noexcept { return version_; }
    std::size_t size() const noexcept { return names_.size(); }

    std::optional<std::size_t> index_of(std::string_view name) const
    {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name)
                return i;
        return std::nullopt;
    }

    friend bool operator==(const LabelVocabulary&, const LabelVocabulary&) = default;

private:
    std::vector<std::string> names_;
    std::string version_;
};

/// Reads {"version": "...", "names": [...]} or a plain list, one name per
/// line ('#' starts a comment).
inline LabelVocabulary load_vocabulary(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open vocabulary file '" + path + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
    {
        try
        {
            const auto j = nlohmann::json::parse(text);
            return {j.at("names").get<std::vector<std::string>>(), j.value("version", std::string{"custom"})};
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(ErrorCode::InvalidConfig, "vocabulary file '" + path + "': " + e.what());
        }
    }
    std::vector<std::string> names;
    std::size_t pos = 0;
    while (pos < text.size())
    {
        auto end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        auto line = text.substr(pos, end - pos);
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b != std::string::npos)
            names.push_back(line.substr(b, line.find_last_not_of(" \t\r") - b + 1));
        pos = end + 1;
    }
    return {std::move(names), "custom"};
}

enum class RecordSource { etherscan, file, synthetic };

inline std::string_view to_string(RecordSource s)
{
    switch (s)
    {
    case RecordSource::etherscan: return "etherscan";
    case RecordSource::file: return "file";
    case RecordSource::synthetic: return "synthetic";
    }
    return "file";
}

inline RecordSource parse_source(std::string_view s)
{
    if (s == "etherscan")
        return RecordSource::etherscan;
    if (s == "file")
        return RecordSource::file;
    if (s == "synthetic")
        return RecordSource::synthetic;
    throw Error(ErrorCode::CorruptRecord, "unknown record source '" + std::string(s) + "'");
}

/// "YYYY-MM-DDTHH:MM:SSZ"
inline std::string format_iso8601(Timestamp t)
{
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with an optional trailing "Z".
inline Timestamp parse_iso8601(std::string_view text)
{
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char tail[8] = {};
    const std::string str(text);
    const int n = std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%7s", &y, &mo, &d, &h, &mi, &s, tail);
    const bool date_only = n == 3 && str.size() == 10;
    const bool full = n == 6 || (n == 7 && std::string_view(tail) == "Z");
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if ((!date_only && !full) || !ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
        throw Error(ErrorCode::InvalidRequest, "not an ISO-8601 UTC timestamp: '" + str + "'");
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

inline Timestamp now_utc() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

struct ContractRecord
{
    std::optional<Address> address;
    Bytecode bytecode{Bytes{0x00}};
    LabelVector labels;
    RecordSource source = RecordSource::file;
    Timestamp observed_at{};

    bool any_label() const noexcept
    {
        for (const auto l : labels)
            if (l)
                return true;
        return false;
    }

    friend bool operator==(const ContractRecord&, const ContractRecord&) = default;
};

/// Returns a copy of `record` whose labels are 1 exactly at `bug_names`.
inline ContractRecord label_record(ContractRecord record, const std::vector<std::string>& bug_names,
                                   const LabelVocabulary& vocab)
{
    LabelVector labels(vocab.size(), 0);
    for (const auto& name : bug_names)
    {
        const auto idx = vocab.index_of(name);
        if (!idx)
            throw Error(ErrorCode::UnknownLabel, "'" + name + "' is not in vocabulary " + vocab.version());
        labels[*idx] = 1;
    }
    record.labels = std::move(labels);
    return record;
}

}  // namespace bytehue::ingest
