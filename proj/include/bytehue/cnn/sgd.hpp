// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <set>

#include "bytehue/cnn/network.hpp"

namespace bytehue::cnn {

/// SGD with momentum and L2 weight decay:
///   v <- momentum * v + grad + weight_decay * param
///   param <- param - lr * v
/// The velocity lives in the optimizer and persists between steps. Layers in
/// `frozen` are never touched.
class Sgd
{
public:
    Sgd(double momentum = 0.9, double weight_decay = 0.0, std::set<std::size_t> frozen = {})
      : momentum_(momentum), weight_decay_(weight_decay), frozen_(std::move(frozen))
    {}

    void step(Parameters& params, const GradientSet& grads, double lr)
    {
        for (auto& [idx, p] : params)
        {
            if (frozen_.contains(idx))
                continue;
            const auto git = grads.find(idx);
            if (git == grads.end() || git->second.weight.shape() != p.weight.shape() ||
                git->second.bias.shape() != p.bias.shape())
                throw Error(ErrorCode::ShapeMismatch, "gradient for layer " + std::to_string(idx) +
                                                          " missing or not congruent with parameters");
            auto [vit, inserted] = velocity_.try_emplace(idx);
            if (inserted)
                vit->second = LayerParams{Tensor(p.weight.shape()), Tensor(p.bias.shape())};
            update(p.weight, git->second.weight, vit->second.weight, lr);
            update(p.bias, git->second.bias, vit->second.bias, lr);
        }
    }

    const Parameters& velocity() const noexcept { return velocity_; }

private:
    void update(Tensor& param, const Tensor& grad, Tensor& v, double lr) const
    {
        for (std::size_t k = 0; k < param.size(); ++k)
        {
            v[k] = momentum_ * v[k] + grad[k] + weight_decay_ * param[k];
            param[k] -= lr * v[k];
        }
    }

    double momentum_;
    double weight_decay_;
    std::set<std::size_t> frozen_;
    Parameters velocity_;
};

/// Single stateful step in the functional style; `opt` carries the velocity.
inline Parameters sgd_step(Sgd& opt, Parameters params, const GradientSet& grads, double lr)
{
    opt.step(params, grads, lr);
    return params;
}

}  // namespace bytehue::cnn
