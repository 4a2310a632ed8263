// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "bytehue/cnn/config.hpp"
#include "bytehue/cnn/network.hpp"
#include "bytehue/hex.hpp"
#include "bytehue/rng.hpp"

namespace bytehue::test {

inline cnn::Tensor random_tensor(const cnn::Shape& shape, SplitMix64& rng, double lo = -1.0, double hi = 1.0)
{
    cnn::Tensor t(shape);
    for (auto& v : t.values())
        v = rng.uniform(lo, hi);
    return t;
}

/// He-initialised parameters with the (otherwise zero) biases randomised so
/// bias paths are exercised too.
inline cnn::Parameters random_params(const cnn::NetworkConfig& cfg, std::uint64_t seed)
{
    auto p = cnn::init_params(cfg, seed);
    SplitMix64 rng(seed ^ 0xb1a5ULL);
    for (auto& [_, lp] : p)
        for (auto& v : lp.bias.values())
            v = rng.uniform(-0.1, 0.1);
    return p;
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps components that are
/// zero up to rounding from dominating the ratio.
inline double relative_error(double a, double b, double floor = 1e-6)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const cnn::GradientSet& a, const cnn::GradientSet& b, double floor = 1e-6)
{
    double worst = 0;
    for (const auto& [idx, pa] : a)
    {
        const auto& pb = b.at(idx);
        for (std::size_t k = 0; k < pa.weight.size(); ++k)
            worst = std::max(worst, relative_error(pa.weight[k], pb.weight[k], floor));
        for (std::size_t k = 0; k < pa.bias.size(); ++k)
            worst = std::max(worst, relative_error(pa.bias[k], pb.bias[k], floor));
    }
    return worst;
}

/// Small networks covering every layer type, each ending in a dense layer
/// of `arity` outputs under `head`.
inline std::vector<cnn::NetworkConfig> gradient_suite(cnn::Head head)
{
    using namespace cnn;
    const auto make = [&](std::string name, std::array<std::size_t, 3> in, std::vector<LayerSpec> layers) {
        layers.push_back(Dense{head.arity});
        return NetworkConfig{std::move(name), in, std::move(layers), head};
    };
    return {
        make("conv1", {3, 4, 4}, {Conv{4, 1, 1, 0}, Flatten{}}),
        make("conv3", {3, 4, 4}, {Conv{3, 3, 1, 1}, Flatten{}}),
        make("conv3_stride2", {3, 4, 4}, {Conv{2, 3, 2, 0}, Flatten{}}),
        make("conv5", {2, 4, 4}, {Conv{2, 5, 1, 2}, Flatten{}}),
        make("relu", {3, 4, 4}, {Conv{4, 3, 1, 1}, ReLU{}, Flatten{}}),
        make("maxpool", {3, 4, 4}, {Conv{3, 3, 1, 1}, MaxPool{2, 2}, Flatten{}}),
        make("gap", {3, 4, 4}, {Conv{4, 3, 1, 1}, GlobalAvgPool{}}),
        make("dense_stack", {3, 2, 2}, {Flatten{}, Dense{5}, ReLU{}}),
        make("nin", {3, 4, 4}, [] {
            auto v = nin_block(4, 3);
            v.push_back(MaxPool{2, 2});
            v.push_back(GlobalAvgPool{});
            return v;
        }()),
    };
}

inline Bytes random_bytes(std::size_t n, SplitMix64& rng)
{
    Bytes b(n);
    for (auto& v : b)
        v = static_cast<std::uint8_t>(rng.below(256));
    return b;
}

inline std::filesystem::path temp_path(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("bytehue_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace bytehue::test
