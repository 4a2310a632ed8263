// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bytehue/error.hpp"
#include "bytehue/hex.hpp"
#include "bytehue/ingest/record.hpp"
#include "bytehue/rng.hpp"

namespace bytehue::ingest {

inline constexpr std::string_view kDatasetSchema = "bytehue-ds/1";

enum class Split { unassigned, train, val, test };

inline std::string_view to_string(Split s)
{
    switch (s)
    {
    case Split::unassigned: return "unassigned";
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "unassigned";
}

inline std::optional<Split> parse_split(std::string_view s)
{
    if (s == "unassigned")
        return Split::unassigned;
    if (s == "train")
        return Split::train;
    if (s == "val")
        return Split::val;
    if (s == "test")
        return Split::test;
    return std::nullopt;
}

/// Records with their split assignment. `splits[i]` belongs to `records[i]`.
struct DatasetManifest
{
    LabelVocabulary vocabulary;
    std::vector<ContractRecord> records;
    std::vector<Split> splits;

    void add(ContractRecord r, Split s = Split::unassigned)
    {
        if (r.labels.size() != vocabulary.size())
            throw Error(ErrorCode::CorruptRecord, "record has " + std::to_string(r.labels.size()) +
                                                      " labels, vocabulary has " + std::to_string(vocabulary.size()));
        records.push_back(std::move(r));
        splits.push_back(s);
    }

    std::vector<const ContractRecord*> in_split(Split s) const
    {
        std::vector<const ContractRecord*> out;
        for (std::size_t i = 0; i < records.size(); ++i)
            if (splits[i] == s)
                out.push_back(&records[i]);
        return out;
    }

    std::size_t count(Split s) const { return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), s)); }

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct RandomSplit
{
    std::uint64_t seed = 0;
    std::array<double, 3> ratios{0.8, 0.1, 0.1};  // train, val, test
};

/// Records observed before `val_start` go to train, those in
/// [val_start, test_start) to val, the rest to test. Without val_start there
/// is no validation split.
struct TemporalSplit
{
    std::optional<Timestamp> val_start;
    Timestamp test_start;
};

using SplitMode = std::variant<RandomSplit, TemporalSplit>;

namespace detail {

inline void require_nonempty(const DatasetManifest& m, Split s, const char* why)
{
    if (m.count(s) == 0)
        throw Error(ErrorCode::DegenerateSplit, std::string(to_string(s)) + " split would be empty" + why);
}

}  // namespace detail

/// Deterministic partition of every record into train/val/test. Random mode
/// stratifies on "has any label": each stratum is shuffled, the strata are
/// interleaved proportionally, and consecutive runs of that ordering become
/// the splits, so the overall counts are exact.
inline DatasetManifest split_dataset(DatasetManifest m, const SplitMode& mode)
{
    const auto n = m.records.size();
    if (n == 0)
        throw Error(ErrorCode::EmptyDataset, "dataset has no records");

    if (const auto* r = std::get_if<RandomSplit>(&mode))
    {
        const auto& ratio = r->ratios;
        for (const auto x : ratio)
            if (x < 0 || !std::isfinite(x))
                throw Error(ErrorCode::InvalidConfig, "split ratios must be non-negative");
        if (std::abs(ratio[0] + ratio[1] + ratio[2] - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidConfig, "split ratios must sum to 1");

        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < n; ++i)
            (m.records[i].any_label() ? pos : neg).push_back(i);
        SplitMix64 rng(r->seed);
        deterministic_shuffle(pos, rng);
        deterministic_shuffle(neg, rng);

        struct Slot
        {
            double key;
            int stratum;
            std::size_t index;
        };
        std::vector<Slot> order;
        order.reserve(n);
        for (std::size_t k = 0; k < pos.size(); ++k)
            order.push_back({(static_cast<double>(k) + 0.5) / static_cast<double>(pos.size()), 0, pos[k]});
        for (std::size_t k = 0; k < neg.size(); ++k)
            order.push_back({(static_cast<double>(k) + 0.5) / static_cast<double>(neg.size()), 1, neg[k]});
        std::stable_sort(order.begin(), order.end(), [](const Slot& a, const Slot& b) {
            return a.key != b.key ? a.key < b.key : a.stratum < b.stratum;
        });

        const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio[0])));
        const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio[1])));
        for (std::size_t k = 0; k < n; ++k)
            m.splits[order[k].index] = k < n_train ? Split::train : k < n_train + n_val ? Split::val : Split::test;

        const std::array<Split, 3> names{Split::train, Split::val, Split::test};
        for (std::size_t s = 0; s < 3; ++s)
            if (ratio[s] > 0)
                detail::require_nonempty(m, names[s], " at these ratios");
        return m;
    }

    const auto& t = std::get<TemporalSplit>(mode);
    if (t.val_start && *t.val_start > t.test_start)
        throw Error(ErrorCode::InvalidConfig, "validation boundary is after the test boundary");
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto at = m.records[i].observed_at;
        if (at >= t.test_start)
            m.splits[i] = Split::test;
        else if (t.val_start && at >= *t.val_start)
            m.splits[i] = Split::val;
        else
            m.splits[i] = Split::train;
    }
    detail::require_nonempty(m, Split::train, " before the boundary");
    detail::require_nonempty(m, Split::test, " after the boundary");
    if (t.val_start)
        detail::require_nonempty(m, Split::val, " between the boundaries");
    return m;
}

// ---- line-delimited JSON persistence ---------------------------------------

inline nlohmann::json record_to_json(const ContractRecord& r, Split split)
{
    nlohmann::json j = {
        {"bytecode", to_hex(r.bytecode)},
        {"labels", r.labels},
        {"source", to_string(r.source)},
        {"observed_at", format_iso8601(r.observed_at)},
        {"split", to_string(split)},
    };
    if (r.address)
        j["address"] = r.address->to_string();
    return j;
}

inline void save_dataset(const DatasetManifest& m, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write dataset '" + path.string() + "'");
    const nlohmann::json header = {
        {"schema", kDatasetSchema},
        {"vocabulary", m.vocabulary.names()},
        {"version", m.vocabulary.version()},
    };
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < m.records.size(); ++i)
        out << record_to_json(m.records[i], m.splits[i]).dump() << '\n';
    out.flush();
    if (!out)
        throw Error(ErrorCode::IoError, "failed writing dataset '" + path.string() + "'");
}

inline DatasetManifest load_dataset(const std::filesystem::path& path, std::size_t max_code_size = kDefaultMaxCodeSize)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read dataset '" + path.string() + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    DatasetManifest m;
    std::size_t pos = 0;
    long long line_no = 0;
    bool have_header = false;
    while (pos < text.size())
    {
        ++line_no;
        const auto nl = text.find('\n', pos);
        // every line, including the last, is newline-terminated by save_dataset
        if (nl == std::string::npos)
            throw Error(ErrorCode::CorruptRecord, "line " + std::to_string(line_no) + " is truncated", line_no);
        const std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;

        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(line);
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(ErrorCode::CorruptRecord, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }

        if (!have_header)
        {
            if (!j.is_object() || !j.contains("schema"))
                throw Error(ErrorCode::CorruptRecord, "line 1 is not a dataset header", line_no);
            if (!j["schema"].is_string() || j["schema"].get<std::string>() != kDatasetSchema)
                throw Error(ErrorCode::SchemaVersionMismatch, "dataset schema " + j["schema"].dump() + ", expected " +
                                                                  std::string(kDatasetSchema));
            try
            {
                m.vocabulary = LabelVocabulary(j.at("vocabulary").get<std::vector<std::string>>(),
                                               j.at("version").get<std::string>());
            }
            catch (const nlohmann::json::exception& e)
            {
                throw Error(ErrorCode::CorruptRecord, std::string("header: ") + e.what(), line_no);
            }
            have_header = true;
            continue;
        }

        try
        {
            ContractRecord r;
            if (j.contains("address"))
                r.address = Address::parse(j.at("address").get<std::string>());
            r.bytecode = parse_hex(j.at("bytecode").get<std::string>(), max_code_size);
            r.labels = j.at("labels").get<LabelVector>();
            for (const auto l : r.labels)
                if (l > 1)
                    throw Error(ErrorCode::CorruptRecord, "labels must be 0 or 1");
            r.source = parse_source(j.at("source").get<std::string>());
            r.observed_at = parse_iso8601(j.at("observed_at").get<std::string>());
            const auto split = parse_split(j.at("split").get<std::string>());
            if (!split)
                throw Error(ErrorCode::CorruptRecord, "unknown split " + j.at("split").dump());
            m.add(std::move(r), *split);
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(ErrorCode::CorruptRecord, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
        catch (const Error& e)
        {
            throw Error(ErrorCode::CorruptRecord, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    if (!have_header)
        throw Error(ErrorCode::CorruptRecord, "dataset file is empty", 1);
    return m;
}

}  // namespace bytehue::ingest
