// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bytehue/error.hpp"
#include "bytehue/ingest/record.hpp"

namespace bytehue::train {

struct ConfusionCounts
{
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }

    // An empty denominator counts as perfect: nothing was claimed wrongly
    // or nothing was missed.
    double precision() const noexcept { return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
    double recall() const noexcept { return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
    double accuracy() const noexcept
    {
        return total() == 0 ? 1.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
    }

    void add(bool predicted, bool actual) noexcept
    {
        if (predicted && actual)
            ++tp;
        else if (predicted)
            ++fp;
        else if (actual)
            ++fn;
        else
            ++tn;
    }

    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept
    {
        tp += o.tp, fp += o.fp, fn += o.fn, tn += o.tn;
        return *this;
    }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Binary runs fill `accuracy/precision/recall` from a single confusion
/// matrix. Multi-label runs report micro-averaged precision/recall, the
/// per-label (micro) accuracy, and separately the subset accuracy.
struct Metrics
{
    bool multilabel = false;
    std::size_t samples = 0;
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double loss = 0;
    std::vector<ConfusionCounts> per_label;
    double subset_accuracy = 0;
    double micro_precision = 0;
    double micro_recall = 0;

    ConfusionCounts summed() const noexcept
    {
        ConfusionCounts c;
        for (const auto& l : per_label)
            c += l;
        return c;
    }
};

inline Metrics binary_metrics(const std::vector<std::uint8_t>& predicted, const std::vector<std::uint8_t>& actual)
{
    if (predicted.size() != actual.size())
        throw Error(ErrorCode::ArityMismatch, "prediction and target counts differ");
    if (predicted.empty())
        throw Error(ErrorCode::EmptySplit, "no samples to score");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        c.add(predicted[i] != 0, actual[i] != 0);
    Metrics m;
    m.samples = predicted.size();
    m.per_label = {c};
    m.accuracy = c.accuracy();
    m.precision = m.micro_precision = c.precision();
    m.recall = m.micro_recall = c.recall();
    m.subset_accuracy = m.accuracy;
    return m;
}

inline Metrics multilabel_metrics(const std::vector<ingest::LabelVector>& predicted,
                                  const std::vector<ingest::LabelVector>& actual)
{
    if (predicted.size() != actual.size())
        throw Error(ErrorCode::ArityMismatch, "prediction and target counts differ");
    if (predicted.empty())
        throw Error(ErrorCode::EmptySplit, "no samples to score");
    const auto labels = actual.front().size();
    Metrics m;
    m.multilabel = true;
    m.samples = predicted.size();
    m.per_label.assign(labels, {});
    std::size_t exact = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
    {
        if (predicted[i].size() != labels || actual[i].size() != labels)
            throw Error(ErrorCode::ArityMismatch, "label vectors differ in length");
        bool all = true;
        for (std::size_t j = 0; j < labels; ++j)
        {
            const bool p = predicted[i][j] != 0, a = actual[i][j] != 0;
            m.per_label[j].add(p, a);
            all = all && p == a;
        }
        exact += all ? 1 : 0;
    }
    const auto sum = m.summed();
    m.subset_accuracy = static_cast<double>(exact) / static_cast<double>(m.samples);
    m.accuracy = sum.accuracy();
    m.precision = m.micro_precision = sum.precision();
    m.recall = m.micro_recall = sum.recall();
    return m;
}

inline nlohmann::json to_json(const Metrics& m)
{
    nlohmann::json per = nlohmann::json::array();
    for (const auto& c : m.per_label)
        per.push_back({{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}});
    nlohmann::json j = {
        {"kind", m.multilabel ? "multilabel" : "binary"},
        {"samples", m.samples},
        {"loss", m.loss},
        {"per_label", std::move(per)},
    };
    if (m.multilabel)
    {
        j["label_accuracy_micro"] = m.accuracy;
        j["subset_accuracy"] = m.subset_accuracy;
        j["precision_micro"] = m.micro_precision;
        j["recall_micro"] = m.micro_recall;
    }
    else
    {
        j["accuracy"] = m.accuracy;
        j["precision"] = m.precision;
        j["recall"] = m.recall;
    }
    return j;
}

}  // namespace bytehue::train
