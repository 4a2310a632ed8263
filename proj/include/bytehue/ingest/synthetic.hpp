// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <vector>

#include "bytehue/error.hpp"
#include "bytehue/hex.hpp"
#include "bytehue/ingest/record.hpp"
#include "bytehue/rng.hpp"

namespace bytehue::ingest {

/// Planted-motif contracts for sanity training. The background is an
/// EVM-flavoured opcode stream; label j is planted as runs of one saturated
/// color, pixel-aligned so the runs survive encoding unchanged. A contract
/// whose motifs do not fit in max_bytes is lengthened to twice their area.
struct SyntheticOptions
{
    std::size_t min_bytes = 480;
    std::size_t max_bytes = 960;
    std::size_t motif_pixels = 24;  // pixels per planted run
    std::size_t motif_runs = 4;     // runs per planted label
    double clean_fraction = 0.5;    // probability a sample carries no label
};

inline constexpr std::size_t kMaxSyntheticLabels = 7;

inline std::array<std::uint8_t, 3> motif_color(std::size_t label)
{
    static constexpr std::array<std::array<std::uint8_t, 3>, kMaxSyntheticLabels> colors{{
        {0xff, 0x00, 0x00},
        {0x00, 0xff, 0x00},
        {0x00, 0x00, 0xff},
        {0xff, 0xff, 0x00},
        {0xff, 0x00, 0xff},
        {0x00, 0xff, 0xff},
        {0xff, 0xff, 0xff},
    }};
    return colors.at(label);
}

namespace detail {

inline Bytes evm_background(std::size_t len, SplitMix64& rng)
{
    // common opcodes: arithmetic, stack, memory, storage, control flow
    static constexpr std::uint8_t ops[] = {0x01, 0x02, 0x03, 0x04, 0x10, 0x11, 0x14, 0x15, 0x16, 0x19, 0x1c,
                                           0x20, 0x33, 0x34, 0x35, 0x36, 0x39, 0x50, 0x51, 0x52, 0x54, 0x55,
                                           0x56, 0x57, 0x5b, 0x80, 0x81, 0x82, 0x90, 0x91, 0xa1, 0xf3, 0xfd};
    Bytes out = {0x60, 0x80, 0x60, 0x40, 0x52};  // PUSH1 0x80 PUSH1 0x40 MSTORE
    while (out.size() < len)
    {
        const auto r = rng.below(10);
        if (r < 3)
        {
            // PUSH1..PUSH4 with immediate data
            const auto n = 1 + rng.below(4);
            out.push_back(static_cast<std::uint8_t>(0x5f + n));
            for (std::uint64_t k = 0; k < n; ++k)
                out.push_back(static_cast<std::uint8_t>(rng.below(256)));
        }
        else
            out.push_back(ops[rng.below(sizeof ops)]);
    }
    out.resize(len);
    return out;
}

/// Length holding `labels_set` planted labels with as much background again.
inline std::size_t bytes_needed(std::size_t labels_set, const SyntheticOptions& opt)
{
    return labels_set * opt.motif_runs * opt.motif_pixels * 3 * 2;
}

}  // namespace detail

/// Plants the motifs for every set label into `bytes` (length a multiple of
/// 3) at non-overlapping pixel-aligned positions.
inline void plant_motifs(Bytes& bytes, const LabelVector& labels, const SyntheticOptions& opt, SplitMix64& rng)
{
    const auto pixels = bytes.size() / 3;
    const auto run = opt.motif_pixels;
    std::size_t planted = 0;
    for (const auto l : labels)
        planted += l ? opt.motif_runs : 0;
    if (planted * run > pixels)
        throw Error(ErrorCode::InvalidConfig, "synthetic contract too short for its motifs");

    // slots of `run` pixels; choose distinct slots for every run
    const auto slots = pixels / run;
    std::vector<std::size_t> order(slots);
    for (std::size_t i = 0; i < slots; ++i)
        order[i] = i;
    deterministic_shuffle(order, rng);
    std::size_t next = 0;
    for (std::size_t j = 0; j < labels.size(); ++j)
    {
        if (!labels[j])
            continue;
        const auto color = motif_color(j);
        for (std::size_t r = 0; r < opt.motif_runs; ++r)
        {
            const auto start = order[next++] * run;
            for (std::size_t p = start; p < start + run; ++p)
                for (std::size_t c = 0; c < 3; ++c)
                    bytes[3 * p + c] = color[c];
        }
    }
}

/// Generates `count` records over `vocab`, where only the first
/// `planted_labels` vocabulary entries are ever set. Deterministic in `seed`.
inline std::vector<ContractRecord> generate_synthetic(std::size_t count, const LabelVocabulary& vocab,
                                                      std::size_t planted_labels, std::uint64_t seed,
                                                      const SyntheticOptions& opt = {})
{
    if (planted_labels == 0 || planted_labels > vocab.size() || planted_labels > kMaxSyntheticLabels)
        throw Error(ErrorCode::InvalidConfig, "planted label count must be in [1, min(vocabulary, 7)]");
    if (opt.min_bytes < 3 || opt.max_bytes < opt.min_bytes || opt.motif_pixels == 0)
        throw Error(ErrorCode::InvalidConfig, "bad synthetic size options");

    SplitMix64 rng(seed);
    const auto base = std::chrono::sys_days{std::chrono::year{2018} / 1 / 1};
    std::vector<ContractRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        LabelVector labels(vocab.size(), 0);
        if (rng.uniform() >= opt.clean_fraction)
        {
            do
            {
                for (std::size_t j = 0; j < planted_labels; ++j)
                    labels[j] = rng.below(2) ? 1 : 0;
            } while (std::find(labels.begin(), labels.end(), 1) == labels.end());
        }
        auto len = opt.min_bytes + rng.below(opt.max_bytes - opt.min_bytes + 1);
        len -= len % 3;
        std::size_t set = 0;
        for (const auto l : labels)
            set += l;
        len = std::max(len, detail::bytes_needed(set, opt));
        auto bytes = detail::evm_background(len, rng);
        plant_motifs(bytes, labels, opt, rng);

        ContractRecord rec;
        rec.bytecode = Bytecode(std::move(bytes));
        rec.labels = std::move(labels);
        rec.source = RecordSource::synthetic;
        rec.observed_at = base + std::chrono::hours{static_cast<long>(i)};
        out.push_back(std::move(rec));
    }
    return out;
}

/// Balanced binary set: the first half clean, the second half carrying one
/// random planted label each, then shuffled.
inline std::vector<ContractRecord> generate_binary_synthetic(std::size_t count, const LabelVocabulary& vocab,
                                                             std::size_t planted_labels, std::uint64_t seed,
                                                             const SyntheticOptions& opt = {})
{
    SyntheticOptions o = opt;
    o.clean_fraction = 1.0;
    auto out = generate_synthetic(count, vocab, planted_labels, seed, o);
    SplitMix64 rng(seed ^ 0x5eedULL);
    for (std::size_t i = count / 2; i < count; ++i)
    {
        auto bytes = out[i].bytecode.bytes();
        LabelVector labels(vocab.size(), 0);
        labels[rng.below(planted_labels)] = 1;
        plant_motifs(bytes, labels, opt, rng);
        out[i].bytecode = Bytecode(std::move(bytes));
        out[i].labels = std::move(labels);
    }
    deterministic_shuffle(out, rng);
    return out;
}

}  // namespace bytehue::ingest
