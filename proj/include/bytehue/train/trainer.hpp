// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bytehue/cnn/network.hpp"
#include "bytehue/cnn/sgd.hpp"
#include "bytehue/encoder.hpp"
#include "bytehue/error.hpp"
#include "bytehue/ingest/dataset.hpp"
#include "bytehue/train/metrics.hpp"

namespace bytehue::train {

enum class Stage { binary, multilabel };
enum class LabelWeighting { none, inverse_frequency };

struct TrainConfig
{
    std::size_t epochs = 100;
    double learning_rate = 0.001;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    Stage stage = Stage::binary;
    std::vector<std::size_t> freeze;
    double threshold = 0.5;
    LabelWeighting label_weighting = LabelWeighting::none;
    double momentum = 0.9;
    double weight_decay = 0.0;
    // multilabel stage: train only on samples with at least one label
    bool positives_only = true;
    // stop once the whole training set is classified at least this well
    std::optional<double> stop_at_train_accuracy;
    bool evaluate_validation = true;
};

struct EpochRecord
{
    std::size_t epoch = 0;
    double mean_loss = 0;
    Metrics train;
    std::optional<Metrics> validation;
    double wall_ms = 0;
};

struct TrainingLog
{
    std::vector<EpochRecord> epochs;

    std::string to_csv() const
    {
        std::ostringstream out;
        out.precision(10);
        out << "epoch,loss,acc,prec,rec,wall_ms\n";
        for (const auto& e : epochs)
            out << e.epoch << ',' << e.mean_loss << ',' << e.train.accuracy << ',' << e.train.precision << ','
                << e.train.recall << ',' << e.wall_ms << '\n';
        return out.str();
    }

    nlohmann::json to_json() const
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : epochs)
        {
            nlohmann::json j = {{"epoch", e.epoch}, {"loss", e.mean_loss}, {"train", train::to_json(e.train)},
                                {"wall_ms", e.wall_ms}};
            if (e.validation)
                j["validation"] = train::to_json(*e.validation);
            arr.push_back(std::move(j));
        }
        return {{"epochs", std::move(arr)}};
    }
};

struct TrainResult
{
    cnn::Parameters params;
    TrainingLog log;
};

/// Inverse-frequency positive-term weights: N_neg / max(N_pos, 1), clamped
/// to [1, 100].
inline std::vector<double> label_weights(const std::vector<const ingest::ContractRecord*>& records, std::size_t labels)
{
    if (labels == 0)
        throw Error(ErrorCode::InvalidConfig, "vocabulary is empty");
    std::vector<double> w(labels);
    for (std::size_t j = 0; j < labels; ++j)
    {
        std::size_t pos = 0;
        for (const auto* r : records)
            pos += r->labels.at(j) ? 1 : 0;
        const auto neg = records.size() - pos;
        w[j] = std::clamp(static_cast<double>(neg) / static_cast<double>(std::max<std::size_t>(pos, 1)), 1.0, 100.0);
    }
    return w;
}

inline std::vector<double> label_weights(const ingest::DatasetManifest& dataset)
{
    std::vector<const ingest::ContractRecord*> all;
    for (const auto& r : dataset.records)
        all.push_back(&r);
    return label_weights(all, dataset.vocabulary.size());
}

namespace detail {

inline bool is_binary_head(const cnn::Head& h) { return h.kind == cnn::HeadKind::softmax && h.arity == 2; }

inline void check_head(const cnn::NetworkConfig& net, Stage stage, std::size_t vocab_size)
{
    if (stage == Stage::binary && !is_binary_head(net.head))
        throw Error(ErrorCode::HeadArityMismatch, "binary stage needs a softmax(2) head");
    if (stage == Stage::multilabel && (net.head.kind != cnn::HeadKind::sigmoid || net.head.arity != vocab_size))
        throw Error(ErrorCode::HeadArityMismatch, "multilabel stage needs a sigmoid head with one output per "
                                                  "vocabulary label (" + std::to_string(vocab_size) + ")");
}

inline cnn::Target target_for(const ingest::ContractRecord& r, Stage stage)
{
    if (stage == Stage::binary)
        return cnn::Target::cls(r.any_label() ? 1 : 0);
    return cnn::Target::multi(r.labels);
}

inline cnn::Tensor encode_tensor(const ingest::ContractRecord& r, const EncodingConfig& enc)
{
    return image_to_tensor(encode(r.bytecode, enc));
}

}  // namespace detail

/// Runs a network over records and scores it. Binary (softmax(2)) heads are
/// scored against "has any label"; sigmoid heads per label.
inline Metrics evaluate(const cnn::Parameters& params, const cnn::NetworkConfig& net_cfg,
                        const std::vector<const ingest::ContractRecord*>& records, double threshold = 0.5,
                        const EncodingConfig& encoding = {})
{
    if (records.empty())
        throw Error(ErrorCode::EmptySplit, "no records to evaluate");
    const cnn::Network net(net_cfg);
    net.check_params(params);
    const auto stage = net_cfg.head.kind == cnn::HeadKind::softmax ? Stage::binary : Stage::multilabel;
    if (stage == Stage::binary && !detail::is_binary_head(net_cfg.head))
        throw Error(ErrorCode::HeadArityMismatch, "softmax heads are scored as binary and need arity 2");

    double loss = 0;
    std::vector<std::uint8_t> bin_pred, bin_true;
    std::vector<ingest::LabelVector> ml_pred, ml_true;
    for (const auto* r : records)
    {
        const auto out = net.forward(params, detail::encode_tensor(*r, encoding)).output;
        loss += net.loss(out, detail::target_for(*r, stage));
        const auto p = cnn::predict_labels(out, net_cfg.head.kind, threshold);
        if (stage == Stage::binary)
        {
            bin_pred.push_back(p.class_index == 1 ? 1 : 0);
            bin_true.push_back(r->any_label() ? 1 : 0);
        }
        else
        {
            ml_pred.push_back(p.labels);
            ml_true.push_back(r->labels);
        }
    }
    auto m = stage == Stage::binary ? binary_metrics(bin_pred, bin_true) : multilabel_metrics(ml_pred, ml_true);
    m.loss = loss / static_cast<double>(records.size());
    return m;
}

/// Mini-batch SGD over the train split. Layers listed in cfg.freeze keep
/// their parameters bit-identical. When every parameterized layer below
/// index f is frozen, activations entering f are computed once and reused.
inline TrainResult train(const ingest::DatasetManifest& dataset, const cnn::NetworkConfig& net_cfg,
                         const TrainConfig& cfg, const EncodingConfig& encoding = {},
                         std::optional<cnn::Parameters> initial = std::nullopt,
                         const std::function<void(const EpochRecord&)>& on_epoch = {})
{
    if (cfg.epochs == 0 || !(cfg.learning_rate >= 0) || cfg.batch_size == 0)
        throw Error(ErrorCode::InvalidConfig, "epochs and batch size must be >= 1 and the learning rate >= 0");
    const cnn::Network net(net_cfg);
    detail::check_head(net_cfg, cfg.stage, dataset.vocabulary.size());
    for (const auto idx : cfg.freeze)
        if (idx >= net.layer_count())
            throw Error(ErrorCode::FreezeIndexInvalid, "freeze index " + std::to_string(idx) + " is not a layer");
    if (net_cfg.input_shape != std::array<std::size_t, 3>{3, encoding.target_height, encoding.target_width})
        throw Error(ErrorCode::ModelIncompatible, "network input shape does not match the encoding target size");

    auto samples = dataset.in_split(ingest::Split::train);
    if (cfg.stage == Stage::multilabel && cfg.positives_only)
        std::erase_if(samples, [](const auto* r) { return !r->any_label(); });
    if (samples.empty())
        throw Error(ErrorCode::EmptyTrainSet, "no training samples");

    cnn::Parameters params = initial ? std::move(*initial) : cnn::init_params(net_cfg, cfg.seed);
    net.check_params(params);

    const std::set<std::size_t> frozen(cfg.freeze.begin(), cfg.freeze.end());
    std::size_t start = net.layer_count();
    for (const auto& [idx, _] : params)
        if (!frozen.contains(idx))
        {
            start = idx;
            break;
        }

    std::vector<double> weights;
    if (cfg.stage == Stage::multilabel && cfg.label_weighting == LabelWeighting::inverse_frequency)
        weights = label_weights(samples, dataset.vocabulary.size());

    // Inputs to layer `start`, computed once.
    std::vector<cnn::Tensor> inputs;
    std::vector<cnn::Target> targets;
    inputs.reserve(samples.size());
    for (const auto* r : samples)
    {
        auto x = detail::encode_tensor(*r, encoding);
        inputs.push_back(start == 0 ? std::move(x) : net.activation_at(params, x, start));
        targets.push_back(detail::target_for(*r, cfg.stage));
    }

    const auto validation = dataset.in_split(ingest::Split::val);
    cnn::Sgd opt(cfg.momentum, cfg.weight_decay, frozen);
    SplitMix64 rng(cfg.seed ^ 0x7261696e5f736571ULL);
    std::vector<std::size_t> order(samples.size());
    TrainResult result;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch)
    {
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        deterministic_shuffle(order, rng);

        double loss_sum = 0;
        std::vector<std::uint8_t> bin_pred(samples.size()), bin_true(samples.size());
        std::vector<ingest::LabelVector> ml_pred(samples.size()), ml_true(samples.size());

        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size)
        {
            const auto end = std::min(order.size(), b + cfg.batch_size);
            const double scale = 1.0 / static_cast<double>(end - b);
            auto grads = cnn::zeros_like(params);
            for (std::size_t k = b; k < end; ++k)
            {
                const auto s = order[k];
                const auto fr = net.forward(params, inputs[s], start);
                const double l = net.loss(fr.output, targets[s], weights);
                if (!std::isfinite(l))
                    throw Error(ErrorCode::DivergenceDetected, "non-finite loss at epoch " + std::to_string(epoch));
                loss_sum += l;
                cnn::accumulate(grads, net.backward(params, fr.cache, targets[s], weights, start), scale);

                const auto p = cnn::predict_labels(fr.output, net_cfg.head.kind, cfg.threshold);
                if (cfg.stage == Stage::binary)
                {
                    bin_pred[s] = p.class_index == 1 ? 1 : 0;
                    bin_true[s] = samples[s]->any_label() ? 1 : 0;
                }
                else
                {
                    ml_pred[s] = p.labels;
                    ml_true[s] = samples[s]->labels;
                }
            }
            opt.step(params, grads, cfg.learning_rate);
            for (const auto& [idx, p] : params)
                if (!p.weight.all_finite() || !p.bias.all_finite())
                    throw Error(ErrorCode::DivergenceDetected, "non-finite parameters at epoch " + std::to_string(epoch));
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_loss = loss_sum / static_cast<double>(samples.size());
        rec.train = cfg.stage == Stage::binary ? binary_metrics(bin_pred, bin_true) : multilabel_metrics(ml_pred, ml_true);
        rec.train.loss = rec.mean_loss;
        if (cfg.evaluate_validation && !validation.empty())
            rec.validation = evaluate(params, net_cfg, validation, cfg.threshold, encoding);

        bool stop = false;
        if (cfg.stop_at_train_accuracy && rec.train.accuracy >= *cfg.stop_at_train_accuracy)
        {
            // running accuracy mixes parameter versions; confirm with the final ones
            const auto check = evaluate(params, net_cfg, samples, cfg.threshold, encoding);
            stop = (cfg.stage == Stage::binary ? check.accuracy : check.subset_accuracy) >= *cfg.stop_at_train_accuracy;
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (on_epoch)
            on_epoch(rec);
        result.log.epochs.push_back(std::move(rec));
        if (stop)
            break;
    }
    result.params = std::move(params);
    return result;
}

struct TransferResult
{
    cnn::NetworkConfig net;
    cnn::Parameters params;
    TrainingLog log;
};

/// Layers below the final dense layer.
inline std::vector<std::size_t> feature_layers(const cnn::NetworkConfig& net)
{
    std::vector<std::size_t> out(cnn::head_layer_index(net));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = i;
    return out;
}

/// Replaces the final dense layer with a freshly initialised one of
/// `new_head_labels` outputs under a sigmoid head, then trains with `freeze`
/// held fixed.
inline TransferResult transfer_learn(const cnn::Parameters& base, const cnn::NetworkConfig& base_net,
                                     std::size_t new_head_labels, const std::vector<std::size_t>& freeze,
                                     const ingest::DatasetManifest& dataset, TrainConfig cfg,
                                     const EncodingConfig& encoding = {},
                                     const std::function<void(const EpochRecord&)>& on_epoch = {})
{
    if (new_head_labels == 0)
        throw Error(ErrorCode::HeadArityMismatch, "new head needs at least one label");
    cnn::Network(base_net).check_params(base);
    const auto head = cnn::head_layer_index(base_net);
    if (head + 1 != base_net.layers.size())
        throw Error(ErrorCode::InvalidConfig, "the dense head must be the last layer");
    for (const auto idx : freeze)
        if (idx >= head)
            throw Error(ErrorCode::FreezeIndexInvalid, "freeze index " + std::to_string(idx) + " is not a feature layer");

    TransferResult r;
    r.net = base_net;
    r.net.layers[head] = cnn::Dense{new_head_labels};
    r.net.head = {cnn::HeadKind::sigmoid, new_head_labels};
    cnn::validate(r.net);

    auto params = base;
    params[head] = cnn::init_params(r.net, cfg.seed).at(head);

    cfg.stage = Stage::multilabel;
    cfg.freeze = freeze;
    auto trained = train(dataset, r.net, cfg, encoding, std::move(params), on_epoch);
    r.params = std::move(trained.params);
    r.log = std::move(trained.log);
    return r;
}

}  // namespace bytehue::train
