// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bytehue/cnn/network.hpp"
#include "bytehue/encoder.hpp"
#include "bytehue/error.hpp"
#include "bytehue/ingest/record.hpp"
#include "bytehue/train/metrics.hpp"

namespace bytehue::train {

/// A trained network together with the encoding it was trained under.
struct Model
{
    cnn::NetworkConfig net;
    cnn::Parameters params;
    std::string encoding_hash;
};

struct InferenceResult
{
    double is_buggy = 0;              // stage-1 probability of class 1
    std::vector<double> confidences;  // stage-2 sigmoid outputs, all zero when skipped
    ingest::LabelVector labels;
    bool stage2_ran = false;
};

inline void check_compatible(const Model& binary, const Model& multilabel)
{
    if (binary.encoding_hash != multilabel.encoding_hash)
        throw Error(ErrorCode::ModelIncompatible, "models were trained under different encodings");
    if (binary.net.input_shape != multilabel.net.input_shape)
        throw Error(ErrorCode::ModelIncompatible, "models take different input shapes");
    if (binary.net.head.kind != cnn::HeadKind::softmax || binary.net.head.arity != 2)
        throw Error(ErrorCode::ModelIncompatible, "stage-1 model needs a softmax(2) head");
    if (multilabel.net.head.kind != cnn::HeadKind::sigmoid)
        throw Error(ErrorCode::ModelIncompatible, "stage-2 model needs a sigmoid head");
}

/// Gate on the binary model, then run the multilabel head only when
/// P(buggy) >= threshold. The same threshold flags stage-2 labels.
inline InferenceResult two_stage_infer(const Model& binary, const Model& multilabel, const cnn::Tensor& input,
                                       double threshold = 0.5)
{
    check_compatible(binary, multilabel);
    InferenceResult r;
    const auto arity = multilabel.net.head.arity;
    r.confidences.assign(arity, 0.0);
    r.labels.assign(arity, 0);

    r.is_buggy = cnn::Network(binary.net).forward(binary.params, input).output[1];
    if (r.is_buggy < threshold)
        return r;

    r.stage2_ran = true;
    const auto out = cnn::Network(multilabel.net).forward(multilabel.params, input).output;
    for (std::size_t j = 0; j < arity; ++j)
    {
        r.confidences[j] = out[j];
        r.labels[j] = out[j] >= threshold ? 1 : 0;
    }
    return r;
}

/// Multilabel metrics of the full two-stage pipeline: records the gate
/// rejects are predicted with no labels.
inline Metrics evaluate_pipeline(const Model& binary, const Model& multilabel,
                                 const std::vector<const ingest::ContractRecord*>& records,
                                 const EncodingConfig& encoding, double threshold = 0.5)
{
    if (records.empty())
        throw Error(ErrorCode::EmptySplit, "no records to evaluate");
    if (encoding_hash(encoding) != binary.encoding_hash)
        throw Error(ErrorCode::ModelIncompatible, "models were trained under a different encoding");
    std::vector<ingest::LabelVector> predicted, actual;
    for (const auto* r : records)
    {
        predicted.push_back(two_stage_infer(binary, multilabel, image_to_tensor(encode(r->bytecode, encoding)), threshold).labels);
        actual.push_back(r->labels);
    }
    return multilabel_metrics(predicted, actual);
}

}  // namespace bytehue::train
