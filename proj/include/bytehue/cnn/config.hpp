// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bytehue/cnn/tensor.hpp"
#include "bytehue/digest.hpp"
#include "bytehue/error.hpp"

namespace bytehue::cnn {

struct Conv
{
    std::size_t out_channels = 1;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    std::size_t padding = 0;
    friend bool operator==(const Conv&, const Conv&) = default;
};

struct ReLU
{
    friend bool operator==(const ReLU&, const ReLU&) = default;
};

struct MaxPool
{
    std::size_t kernel = 2;
    std::size_t stride = 2;
    friend bool operator==(const MaxPool&, const MaxPool&) = default;
};

struct GlobalAvgPool
{
    friend bool operator==(const GlobalAvgPool&, const GlobalAvgPool&) = default;
};

struct Dense
{
    std::size_t out_features = 1;
    friend bool operator==(const Dense&, const Dense&) = default;
};

struct Flatten
{
    friend bool operator==(const Flatten&, const Flatten&) = default;
};

using LayerSpec = std::variant<Conv, ReLU, MaxPool, GlobalAvgPool, Dense, Flatten>;

inline bool has_params(const LayerSpec& l) noexcept
{
    return std::holds_alternative<Conv>(l) || std::holds_alternative<Dense>(l);
}

/// Conv(k) -> ReLU -> Conv(1x1) -> ReLU, "same" padding, stride 1. The 1x1
/// stage mixes channels per pixel.
inline std::vector<LayerSpec> nin_block(std::size_t out_channels, std::size_t kernel)
{
    return {Conv{out_channels, kernel, 1, kernel / 2}, ReLU{}, Conv{out_channels, 1, 1, 0}, ReLU{}};
}

enum class HeadKind { softmax, sigmoid };

struct Head
{
    HeadKind kind = HeadKind::softmax;
    std::size_t arity = 2;
    friend bool operator==(const Head&, const Head&) = default;
};

struct NetworkConfig
{
    std::string name;
    std::array<std::size_t, 3> input_shape{3, 224, 224};
    std::vector<LayerSpec> layers;
    Head head;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Activation shape after every layer; element 0 is the input shape.
/// Throws InvalidConfig on any shape violation, including a final output
/// whose arity differs from the head.
inline std::vector<Shape> layer_shapes(const NetworkConfig& cfg)
{
    std::vector<Shape> shapes;
    Shape cur{cfg.input_shape[0], cfg.input_shape[1], cfg.input_shape[2]};
    for (const auto d : cur)
        if (d == 0)
            throw Error(ErrorCode::InvalidConfig, "input dimensions must be positive");
    shapes.push_back(cur);

    for (std::size_t i = 0; i < cfg.layers.size(); ++i)
    {
        const auto where = "layer " + std::to_string(i) + ": ";
        const auto need_spatial = [&] {
            if (cur.size() != 3)
                throw Error(ErrorCode::InvalidConfig, where + "expects a (C,H,W) input, got " + shape_string(cur));
        };
        std::visit(
            [&](const auto& l) {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, Conv>)
                {
                    need_spatial();
                    if (l.kernel != 1 && l.kernel != 3 && l.kernel != 5)
                        throw Error(ErrorCode::InvalidConfig, where + "kernel must be 1, 3 or 5");
                    if (l.stride == 0 || l.out_channels == 0)
                        throw Error(ErrorCode::InvalidConfig, where + "stride and out_channels must be positive");
                    const auto h = cur[1] + 2 * l.padding, w = cur[2] + 2 * l.padding;
                    if (h < l.kernel || w < l.kernel)
                        throw Error(ErrorCode::InvalidConfig, where + "kernel larger than padded input");
                    cur = {l.out_channels, (h - l.kernel) / l.stride + 1, (w - l.kernel) / l.stride + 1};
                }
                else if constexpr (std::is_same_v<L, MaxPool>)
                {
                    need_spatial();
                    if (l.kernel == 0 || l.stride == 0)
                        throw Error(ErrorCode::InvalidConfig, where + "pool kernel and stride must be positive");
                    if (cur[1] < l.kernel || cur[2] < l.kernel)
                        throw Error(ErrorCode::InvalidConfig, where + "pool window larger than input " + shape_string(cur));
                    cur = {cur[0], (cur[1] - l.kernel) / l.stride + 1, (cur[2] - l.kernel) / l.stride + 1};
                }
                else if constexpr (std::is_same_v<L, GlobalAvgPool>)
                {
                    need_spatial();
                    cur = {cur[0]};
                }
                else if constexpr (std::is_same_v<L, Flatten>)
                {
                    cur = {shape_size(cur)};
                }
                else if constexpr (std::is_same_v<L, Dense>)
                {
                    if (cur.size() != 1)
                        throw Error(ErrorCode::InvalidConfig, where + "dense expects a flat input; insert flatten");
                    if (l.out_features == 0)
                        throw Error(ErrorCode::InvalidConfig, where + "out_features must be positive");
                    cur = {l.out_features};
                }
                // ReLU keeps the shape
            },
            cfg.layers[i]);
        shapes.push_back(cur);
    }

    if (cfg.head.arity == 0)
        throw Error(ErrorCode::InvalidConfig, "head arity must be positive");
    if (cur.size() != 1 || cur[0] != cfg.head.arity)
        throw Error(ErrorCode::InvalidConfig, "network output " + shape_string(cur) + " does not match head arity " +
                                                  std::to_string(cfg.head.arity));
    return shapes;
}

inline void validate(const NetworkConfig& cfg) { (void)layer_shapes(cfg); }

/// Index of the final parameterized layer, which transfer learning swaps out.
inline std::size_t head_layer_index(const NetworkConfig& cfg)
{
    for (std::size_t i = cfg.layers.size(); i-- > 0;)
        if (std::holds_alternative<Dense>(cfg.layers[i]))
            return i;
    throw Error(ErrorCode::InvalidConfig, "network has no dense head layer");
}

// ---- JSON -----------------------------------------------------------------

inline nlohmann::json to_json(const LayerSpec& layer)
{
    return std::visit(
        [](const auto& l) -> nlohmann::json {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, Conv>)
                return {{"type", "conv"}, {"out_channels", l.out_channels}, {"kernel", l.kernel},
                        {"stride", l.stride}, {"padding", l.padding}};
            else if constexpr (std::is_same_v<L, ReLU>)
                return {{"type", "relu"}};
            else if constexpr (std::is_same_v<L, MaxPool>)
                return {{"type", "maxpool"}, {"kernel", l.kernel}, {"stride", l.stride}};
            else if constexpr (std::is_same_v<L, GlobalAvgPool>)
                return {{"type", "global_avg_pool"}};
            else if constexpr (std::is_same_v<L, Dense>)
                return {{"type", "dense"}, {"out_features", l.out_features}};
            else
                return {{"type", "flatten"}};
        },
        layer);
}

/// Canonical form: NiN blocks expanded, keys sorted, compact dump.
inline nlohmann::json to_json(const NetworkConfig& cfg)
{
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : cfg.layers)
        layers.push_back(to_json(l));
    return {
        {"name", cfg.name},
        {"input_shape", cfg.input_shape},
        {"layers", std::move(layers)},
        {"head", {{"type", cfg.head.kind == HeadKind::softmax ? "softmax" : "sigmoid"}, {"arity", cfg.head.arity}}},
    };
}

inline std::string canonical_json(const NetworkConfig& cfg) { return to_json(cfg).dump(); }

inline std::string config_hash(const NetworkConfig& cfg) { return sha256_hex(canonical_json(cfg)); }

/// Accepts the canonical form plus the "nin" macro
/// ({"type":"nin","out_channels":C,"kernel":k}) and optional fields with
/// defaults (stride 1, padding 0, pool stride = kernel).
inline NetworkConfig network_from_json(const nlohmann::json& j)
{
    NetworkConfig cfg;
    try
    {
        cfg.name = j.value("name", std::string{"unnamed"});
        const auto& shape = j.at("input_shape");
        if (!shape.is_array() || shape.size() != 3)
            throw Error(ErrorCode::InvalidConfig, "input_shape must be [C, H, W]");
        for (std::size_t i = 0; i < 3; ++i)
            cfg.input_shape[i] = shape.at(i).get<std::size_t>();

        for (const auto& l : j.at("layers"))
        {
            const auto type = l.at("type").get<std::string>();
            if (type == "conv")
                cfg.layers.emplace_back(Conv{l.at("out_channels").get<std::size_t>(), l.at("kernel").get<std::size_t>(),
                                             l.value("stride", std::size_t{1}), l.value("padding", std::size_t{0})});
            else if (type == "relu")
                cfg.layers.emplace_back(ReLU{});
            else if (type == "maxpool")
            {
                const auto k = l.at("kernel").get<std::size_t>();
                cfg.layers.emplace_back(MaxPool{k, l.value("stride", k)});
            }
            else if (type == "global_avg_pool")
                cfg.layers.emplace_back(GlobalAvgPool{});
            else if (type == "dense")
                cfg.layers.emplace_back(Dense{l.at("out_features").get<std::size_t>()});
            else if (type == "flatten")
                cfg.layers.emplace_back(Flatten{});
            else if (type == "nin")
            {
                for (auto& sub : nin_block(l.at("out_channels").get<std::size_t>(), l.value("kernel", std::size_t{3})))
                    cfg.layers.push_back(std::move(sub));
            }
            else
                throw Error(ErrorCode::InvalidConfig, "unknown layer type '" + type + "'");
        }

        const auto& head = j.at("head");
        const auto kind = head.at("type").get<std::string>();
        if (kind == "softmax")
            cfg.head.kind = HeadKind::softmax;
        else if (kind == "sigmoid")
            cfg.head.kind = HeadKind::sigmoid;
        else
            throw Error(ErrorCode::InvalidConfig, "unknown head type '" + kind + "'");
        cfg.head.arity = head.at("arity").get<std::size_t>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorCode::InvalidConfig, std::string("network config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

/// The reference network: two NiN blocks with 2x2 pooling, global average
/// pooling and a dense layer feeding the head.
inline NetworkConfig bytehue_micro(Head head = {HeadKind::softmax, 2}, std::size_t height = 224, std::size_t width = 224)
{
    NetworkConfig cfg;
    cfg.name = "bytehue-micro";
    cfg.input_shape = {3, height, width};
    for (auto& l : nin_block(8, 3))
        cfg.layers.push_back(std::move(l));
    cfg.layers.emplace_back(MaxPool{2, 2});
    for (auto& l : nin_block(16, 3))
        cfg.layers.push_back(std::move(l));
    cfg.layers.emplace_back(MaxPool{2, 2});
    cfg.layers.emplace_back(GlobalAvgPool{});
    cfg.layers.emplace_back(Dense{head.arity});
    cfg.head = head;
    validate(cfg);
    return cfg;
}

}  // namespace bytehue::cnn
