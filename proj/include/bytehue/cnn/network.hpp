// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "bytehue/cnn/config.hpp"
#include "bytehue/cnn/tensor.hpp"
#include "bytehue/digest.hpp"
#include "bytehue/error.hpp"
#include "bytehue/rng.hpp"

namespace bytehue::cnn {

struct LayerParams
{
    Tensor weight;  // conv: (out, in, k, k); dense: (out, in)
    Tensor bias;    // (out)
    friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Weights keyed by layer index; std::map gives a fixed iteration order.
using Parameters = std::map<std::size_t, LayerParams>;
using GradientSet = Parameters;

inline std::size_t param_count(const Parameters& params)
{
    std::size_t n = 0;
    for (const auto& [_, p] : params)
        n += p.weight.size() + p.bias.size();
    return n;
}

/// SHA-256 over every weight and bias in iteration order.
inline std::string param_checksum(const Parameters& params)
{
    Sha256 h;
    for (const auto& [idx, p] : params)
    {
        const std::uint64_t key = idx;
        h.update({reinterpret_cast<const std::uint8_t*>(&key), sizeof key});
        for (const auto* t : {&p.weight, &p.bias})
            h.update({reinterpret_cast<const std::uint8_t*>(t->data()), t->size() * sizeof(double)});
    }
    return h.finish_hex();
}

namespace detail {

inline std::uint64_t fingerprint(const Parameters& params)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&](const Tensor& t) {
        for (const auto v : t.values())
        {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            h = (h ^ bits) * 0x100000001b3ULL;
        }
    };
    for (const auto& [idx, p] : params)
    {
        h = (h ^ idx) * 0x100000001b3ULL;
        mix(p.weight);
        mix(p.bias);
    }
    return h;
}

inline double sigmoid(double z)
{
    if (z >= 0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace detail

/// Training target: a class index for softmax heads, per-label values in
/// [0, 1] for sigmoid heads (hard labels are 0/1).
struct Target
{
    std::variant<std::size_t, std::vector<double>> value;

    static Target cls(std::size_t index) { return {index}; }

    template <typename Range>
    static Target multi(const Range& labels)
    {
        std::vector<double> v;
        for (const auto x : labels)
            v.push_back(static_cast<double>(x));
        return {std::move(v)};
    }
};

inline constexpr double kProbClampLow = 1e-12;
inline constexpr double kProbClampHigh = 1.0 - 1e-12;

/// Everything backward() needs from a forward pass.
struct ForwardCache
{
    std::vector<Tensor> activations;                 // [i] = input of layer i, back() = logits
    std::vector<std::vector<std::size_t>> argmax;    // per layer, max-pool only
    std::size_t start_layer = 0;
    std::string config_hash;
    std::uint64_t params_fingerprint = 0;
};

struct ForwardResult
{
    Tensor output;  // head probabilities
    ForwardCache cache;
};

/// He-uniform weights (bound sqrt(6 / fan_in)), zero biases, drawn from one
/// SplitMix64 stream in layer order.
inline Parameters init_params(const NetworkConfig& cfg, std::uint64_t seed)
{
    const auto shapes = layer_shapes(cfg);
    SplitMix64 rng(seed);
    Parameters params;
    for (std::size_t i = 0; i < cfg.layers.size(); ++i)
    {
        const auto& in = shapes[i];
        if (const auto* c = std::get_if<Conv>(&cfg.layers[i]))
        {
            const auto fan_in = in[0] * c->kernel * c->kernel;
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
            LayerParams p{Tensor({c->out_channels, in[0], c->kernel, c->kernel}), Tensor({c->out_channels})};
            for (auto& w : p.weight.values())
                w = rng.uniform(-bound, bound);
            params.emplace(i, std::move(p));
        }
        else if (const auto* d = std::get_if<Dense>(&cfg.layers[i]))
        {
            const auto fan_in = in[0];
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
            LayerParams p{Tensor({d->out_features, fan_in}), Tensor({d->out_features})};
            for (auto& w : p.weight.values())
                w = rng.uniform(-bound, bound);
            params.emplace(i, std::move(p));
        }
    }
    return params;
}

/// Zero tensors congruent with `like`.
inline GradientSet zeros_like(const Parameters& like)
{
    GradientSet g;
    for (const auto& [idx, p] : like)
        g.emplace(idx, LayerParams{Tensor(p.weight.shape()), Tensor(p.bias.shape())});
    return g;
}

/// acc += scale * g
inline void accumulate(GradientSet& acc, const GradientSet& g, double scale = 1.0)
{
    for (const auto& [idx, p] : g)
    {
        auto it = acc.find(idx);
        if (it == acc.end() || it->second.weight.shape() != p.weight.shape() || it->second.bias.shape() != p.bias.shape())
            throw Error(ErrorCode::ShapeMismatch, "gradient sets are not congruent at layer " + std::to_string(idx));
        auto& w = it->second.weight;
        auto& b = it->second.bias;
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] += scale * p.weight[k];
        for (std::size_t k = 0; k < b.size(); ++k)
            b[k] += scale * p.bias[k];
    }
}

inline double l2_norm(const GradientSet& g)
{
    double s = 0;
    for (const auto& [_, p] : g)
    {
        for (const auto v : p.weight.values())
            s += v * v;
        for (const auto v : p.bias.values())
            s += v * v;
    }
    return std::sqrt(s);
}

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

inline bool is_pointwise(const Conv& c) noexcept { return c.kernel == 1 && c.stride == 1 && c.padding == 0; }

// Unfolds a (C,H,W) input into a (C*k*k, OH*OW) patch matrix; zero padding
// cells are written as 0.
// Per-thread scratch that only ever grows, so the large patch matrices are
// not returned to the allocator on every call.
inline double* scratch(std::size_t slot, std::size_t n)
{
    thread_local AlignedDoubles buffers[2];
    auto& b = buffers[slot];
    if (b.size() < n)
        b.resize(n);
    return b.data();
}

inline RowMap im2col(const Tensor& in, const Conv& c, std::size_t OH, std::size_t OW)
{
    const auto C = in.dim(0), H = in.dim(1), W = in.dim(2);
    const auto k = c.kernel, s = c.stride;
    const auto pad = static_cast<std::ptrdiff_t>(c.padding);
    RowMap col(scratch(0, C * k * k * OH * OW), static_cast<Eigen::Index>(C * k * k), static_cast<Eigen::Index>(OH * OW));
    for (std::size_t ci = 0; ci < C; ++ci)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx)
            {
                double* row = col.data() + ((ci * k + ky) * k + kx) * OH * OW;
                for (std::size_t oy = 0; oy < OH; ++oy)
                {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * s + ky) - pad;
                    double* dst = row + oy * OW;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H))
                    {
                        std::fill(dst, dst + OW, 0.0);
                        continue;
                    }
                    const double* src = in.data() + (ci * H + static_cast<std::size_t>(iy)) * W;
                    for (std::size_t ox = 0; ox < OW; ++ox)
                    {
                        const auto ix = static_cast<std::ptrdiff_t>(ox * s + kx) - pad;
                        dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) ? 0.0 : src[ix];
                    }
                }
            }
    return col;
}

// Adjoint of im2col: scatters patch-matrix gradients back onto the input.
inline void col2im(const RowMap& col, const Conv& c, std::size_t OH, std::size_t OW, Tensor& din)
{
    const auto C = din.dim(0), H = din.dim(1), W = din.dim(2);
    const auto k = c.kernel, s = c.stride;
    const auto pad = static_cast<std::ptrdiff_t>(c.padding);
    for (std::size_t ci = 0; ci < C; ++ci)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx)
            {
                const double* row = col.data() + ((ci * k + ky) * k + kx) * OH * OW;
                for (std::size_t oy = 0; oy < OH; ++oy)
                {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * s + ky) - pad;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H))
                        continue;
                    const double* src = row + oy * OW;
                    double* dst = din.data() + (ci * H + static_cast<std::size_t>(iy)) * W;
                    for (std::size_t ox = 0; ox < OW; ++ox)
                    {
                        const auto ix = static_cast<std::ptrdiff_t>(ox * s + kx) - pad;
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(W))
                            dst[ix] += src[ox];
                    }
                }
            }
}

// Cross-correlation of one (C,H,W) input with (O,C,k,k) weights, computed as
// weights(O, C*k*k) x patches(C*k*k, OH*OW).
inline void conv_forward(const Tensor& in, const LayerParams& p, const Conv& c, Tensor& out)
{
    const auto C = in.dim(0);
    const auto O = out.dim(0), OH = out.dim(1), OW = out.dim(2);
    const auto K = static_cast<Eigen::Index>(C * c.kernel * c.kernel);
    const auto P = static_cast<Eigen::Index>(OH * OW);
    ConstRowMap w(p.weight.data(), static_cast<Eigen::Index>(O), K);
    RowMap y(out.data(), static_cast<Eigen::Index>(O), P);
    if (is_pointwise(c))
        y.noalias() = w * ConstRowMap(in.data(), K, P);
    else
    {
        y.noalias() = w * im2col(in, c, OH, OW);
    }
    for (std::size_t o = 0; o < O; ++o)
        y.row(static_cast<Eigen::Index>(o)).array() += p.bias[o];
}

// Accumulates weight/bias gradients and, when `din` is non-null, the input
// gradient.
inline void conv_backward(const Tensor& in, const Tensor& gout, const LayerParams& p, const Conv& c,
                          LayerParams& grad, Tensor* din)
{
    const auto C = in.dim(0);
    const auto O = gout.dim(0), OH = gout.dim(1), OW = gout.dim(2);
    const auto K = static_cast<Eigen::Index>(C * c.kernel * c.kernel);
    const auto P = static_cast<Eigen::Index>(OH * OW);
    ConstRowMap w(p.weight.data(), static_cast<Eigen::Index>(O), K);
    ConstRowMap g(gout.data(), static_cast<Eigen::Index>(O), P);
    RowMap gw(grad.weight.data(), static_cast<Eigen::Index>(O), K);
    for (std::size_t o = 0; o < O; ++o)
        grad.bias[o] += g.row(static_cast<Eigen::Index>(o)).sum();
    if (is_pointwise(c))
    {
        ConstRowMap x(in.data(), K, P);
        gw.noalias() += g * x.transpose();
        if (din)
            RowMap(din->data(), K, P).noalias() += w.transpose() * g;
        return;
    }
    gw.noalias() += g * im2col(in, c, OH, OW).transpose();
    if (din)
    {
        RowMap dcol(scratch(1, static_cast<std::size_t>(K * P)), K, P);
        dcol.noalias() = w.transpose() * g;
        col2im(dcol, c, OH, OW, *din);
    }
}

}  // namespace detail

/// A validated configuration with its layer shapes and hash precomputed.
class Network
{
public:
    explicit Network(NetworkConfig cfg)
      : cfg_(std::move(cfg)), shapes_(layer_shapes(cfg_)), hash_(config_hash(cfg_))
    {}

    const NetworkConfig& config() const noexcept { return cfg_; }
    const std::vector<Shape>& shapes() const noexcept { return shapes_; }
    const std::string& hash() const noexcept { return hash_; }
    std::size_t layer_count() const noexcept { return cfg_.layers.size(); }

    /// Checks that `params` holds exactly the tensors this network needs.
    void check_params(const Parameters& params) const
    {
        std::size_t expected = 0;
        for (std::size_t i = 0; i < cfg_.layers.size(); ++i)
        {
            if (!has_params(cfg_.layers[i]))
                continue;
            ++expected;
            const auto it = params.find(i);
            if (it == params.end())
                throw Error(ErrorCode::ShapeMismatch, "missing parameters for layer " + std::to_string(i));
            const auto& in = shapes_[i];
            Shape wshape, bshape;
            if (const auto* c = std::get_if<Conv>(&cfg_.layers[i]))
                wshape = {c->out_channels, in[0], c->kernel, c->kernel}, bshape = {c->out_channels};
            else
            {
                const auto& d = std::get<Dense>(cfg_.layers[i]);
                wshape = {d.out_features, in[0]}, bshape = {d.out_features};
            }
            if (it->second.weight.shape() != wshape || it->second.bias.shape() != bshape)
                throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(i) + " expects weight " +
                                                          shape_string(wshape) + ", got " +
                                                          shape_string(it->second.weight.shape()));
        }
        if (params.size() != expected)
            throw Error(ErrorCode::ShapeMismatch, "parameter set has tensors for layers the network does not have");
    }

    /// Runs layers [start_layer, end). `input` must have the activation shape
    /// at start_layer (the network input shape when start_layer is 0).
    ForwardResult forward(const Parameters& params, const Tensor& input, std::size_t start_layer = 0) const
    {
        if (start_layer > cfg_.layers.size())
            throw Error(ErrorCode::ShapeMismatch, "start layer out of range");
        if (input.shape() != shapes_[start_layer])
            throw Error(ErrorCode::ShapeMismatch, "input shape " + shape_string(input.shape()) + " does not match " +
                                                      shape_string(shapes_[start_layer]));
        ForwardResult r;
        auto& cache = r.cache;
        cache.start_layer = start_layer;
        cache.config_hash = hash_;
        cache.params_fingerprint = detail::fingerprint(params);
        cache.activations.reserve(cfg_.layers.size() + 1 - start_layer);
        cache.activations.push_back(input);
        cache.argmax.resize(cfg_.layers.size());

        for (std::size_t i = start_layer; i < cfg_.layers.size(); ++i)
            cache.activations.push_back(run_layer(params, i, cache.activations.back(), cache.argmax[i]));
        r.output = apply_head(cache.activations.back());
        return r;
    }

    /// Activation entering layer `end_layer` (the logits when end_layer is
    /// the layer count). No cache is kept.
    Tensor activation_at(const Parameters& params, const Tensor& input, std::size_t end_layer) const
    {
        if (end_layer > cfg_.layers.size())
            throw Error(ErrorCode::ShapeMismatch, "layer index out of range");
        if (input.shape() != shapes_[0])
            throw Error(ErrorCode::ShapeMismatch, "input shape " + shape_string(input.shape()) + " does not match " +
                                                      shape_string(shapes_[0]));
        Tensor x = input;
        std::vector<std::size_t> scratch;
        for (std::size_t i = 0; i < end_layer; ++i)
            x = run_layer(params, i, x, scratch);
        return x;
    }

    Tensor apply_head(const Tensor& logits) const
    {
        Tensor out(logits.shape());
        if (cfg_.head.kind == HeadKind::softmax)
        {
            double mx = logits[0];
            for (const auto v : logits.values())
                mx = std::max(mx, v);
            double sum = 0;
            for (std::size_t k = 0; k < logits.size(); ++k)
                sum += (out[k] = std::exp(logits[k] - mx));
            for (auto& v : out.values())
                v /= sum;
        }
        else
        {
            for (std::size_t k = 0; k < logits.size(); ++k)
                out[k] = detail::sigmoid(logits[k]);
        }
        return out;
    }

    /// Gradient of the loss with respect to the head logits.
    Tensor output_gradient(const Tensor& probs, const Target& target, std::span<const double> label_weights) const
    {
        check_target(probs, target, label_weights);
        Tensor g(probs.shape());
        if (cfg_.head.kind == HeadKind::softmax)
        {
            const auto t = std::get<std::size_t>(target.value);
            const double pt = probs[t];
            if (pt < kProbClampLow || pt > kProbClampHigh)
                return g;  // loss is flat where the clamp is active
            for (std::size_t k = 0; k < probs.size(); ++k)
                g[k] = probs[k] - (k == t ? 1.0 : 0.0);
            return g;
        }
        const auto& y = std::get<std::vector<double>>(target.value);
        for (std::size_t j = 0; j < probs.size(); ++j)
        {
            const double p = probs[j];
            if (p < kProbClampLow || p > kProbClampHigh)
                continue;
            const double w = label_weights.empty() ? 1.0 : label_weights[j];
            g[j] = (1.0 - y[j]) * p - w * y[j] * (1.0 - p);
        }
        return g;
    }

    double loss(const Tensor& probs, const Target& target, std::span<const double> label_weights = {}) const
    {
        check_target(probs, target, label_weights);
        const auto clamp = [](double p) { return std::clamp(p, kProbClampLow, kProbClampHigh); };
        if (cfg_.head.kind == HeadKind::softmax)
            return -std::log(clamp(probs[std::get<std::size_t>(target.value)]));
        const auto& y = std::get<std::vector<double>>(target.value);
        double l = 0;
        for (std::size_t j = 0; j < probs.size(); ++j)
        {
            const double p = clamp(probs[j]);
            const double w = label_weights.empty() ? 1.0 : label_weights[j];
            l -= w * y[j] * std::log(p) + (1.0 - y[j]) * std::log(1.0 - p);
        }
        return l;
    }

    /// Analytic gradients for every parameterized layer at or above
    /// `stop_layer` (which must be >= the cache's start layer).
    GradientSet backward(const Parameters& params, const ForwardCache& cache, const Target& target,
                         std::span<const double> label_weights = {}, std::size_t stop_layer = 0) const
    {
        if (cache.config_hash != hash_ || cache.params_fingerprint != detail::fingerprint(params) ||
            cache.activations.size() != cfg_.layers.size() + 1 - cache.start_layer)
            throw Error(ErrorCode::StaleCache, "forward cache does not belong to these parameters");
        stop_layer = std::max(stop_layer, cache.start_layer);

        GradientSet grads;
        for (const auto& [idx, p] : params)
            if (idx >= stop_layer)
                grads.emplace(idx, LayerParams{Tensor(p.weight.shape()), Tensor(p.bias.shape())});

        const auto act = [&](std::size_t layer) -> const Tensor& {
            return cache.activations[layer - cache.start_layer];
        };
        Tensor g = output_gradient(apply_head(act(cfg_.layers.size())), target, label_weights);

        for (std::size_t i = cfg_.layers.size(); i-- > stop_layer;)
        {
            const Tensor& x = act(i);
            const bool need_input_grad = i > stop_layer;
            Tensor gin;
            if (need_input_grad)
                gin = Tensor(x.shape());
            std::visit(
                [&](const auto& l) {
                    using L = std::decay_t<decltype(l)>;
                    if constexpr (std::is_same_v<L, Conv>)
                        detail::conv_backward(x, g, lookup(params, i), l, grads.at(i), need_input_grad ? &gin : nullptr);
                    else if constexpr (std::is_same_v<L, ReLU>)
                    {
                        if (need_input_grad)
                            for (std::size_t k = 0; k < x.size(); ++k)
                                gin[k] = x[k] > 0 ? g[k] : 0.0;
                    }
                    else if constexpr (std::is_same_v<L, MaxPool>)
                    {
                        if (need_input_grad)
                        {
                            const auto& am = cache.argmax[i];
                            for (std::size_t k = 0; k < am.size(); ++k)
                                gin[am[k]] += g[k];
                        }
                    }
                    else if constexpr (std::is_same_v<L, GlobalAvgPool>)
                    {
                        if (need_input_grad)
                        {
                            const auto plane = x.dim(1) * x.dim(2);
                            const double inv = 1.0 / static_cast<double>(plane);
                            for (std::size_t c = 0; c < x.dim(0); ++c)
                                for (std::size_t k = 0; k < plane; ++k)
                                    gin[c * plane + k] = g[c] * inv;
                        }
                    }
                    else if constexpr (std::is_same_v<L, Dense>)
                    {
                        const auto& p = lookup(params, i);
                        auto& gp = grads.at(i);
                        const auto n_in = x.size();
                        for (std::size_t o = 0; o < l.out_features; ++o)
                        {
                            const double go = g[o];
                            gp.bias[o] += go;
                            double* grow = gp.weight.data() + o * n_in;
                            const double* wrow = p.weight.data() + o * n_in;
                            for (std::size_t k = 0; k < n_in; ++k)
                                grow[k] += go * x[k];
                            if (need_input_grad)
                                for (std::size_t k = 0; k < n_in; ++k)
                                    gin[k] += wrow[k] * go;
                        }
                    }
                    else
                    {
                        if (need_input_grad)
                            std::copy(g.values().begin(), g.values().end(), gin.values().begin());
                    }
                },
                cfg_.layers[i]);
            if (need_input_grad)
                g = std::move(gin);
        }
        return grads;
    }

private:
    Tensor run_layer(const Parameters& params, std::size_t i, const Tensor& x, std::vector<std::size_t>& argmax) const
    {
        Tensor y(shapes_[i + 1]);
        std::visit(
            [&](const auto& l) {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, Conv>)
                    detail::conv_forward(x, lookup(params, i), l, y);
                else if constexpr (std::is_same_v<L, ReLU>)
                {
                    for (std::size_t k = 0; k < x.size(); ++k)
                        y[k] = x[k] > 0 ? x[k] : 0.0;
                }
                else if constexpr (std::is_same_v<L, MaxPool>)
                    maxpool_forward(x, l, y, argmax);
                else if constexpr (std::is_same_v<L, GlobalAvgPool>)
                {
                    const auto plane = x.dim(1) * x.dim(2);
                    for (std::size_t c = 0; c < x.dim(0); ++c)
                    {
                        double s = 0;
                        for (std::size_t k = 0; k < plane; ++k)
                            s += x[c * plane + k];
                        y[c] = s / static_cast<double>(plane);
                    }
                }
                else if constexpr (std::is_same_v<L, Dense>)
                {
                    const auto& p = lookup(params, i);
                    const auto n_in = x.size();
                    for (std::size_t o = 0; o < l.out_features; ++o)
                    {
                        double s = p.bias[o];
                        const double* row = p.weight.data() + o * n_in;
                        for (std::size_t k = 0; k < n_in; ++k)
                            s += row[k] * x[k];
                        y[o] = s;
                    }
                }
                else
                {
                    std::copy(x.values().begin(), x.values().end(), y.values().begin());
                }
            },
            cfg_.layers[i]);
        return y;
    }

    static const LayerParams& lookup(const Parameters& params, std::size_t i)
    {
        const auto it = params.find(i);
        if (it == params.end())
            throw Error(ErrorCode::ShapeMismatch, "missing parameters for layer " + std::to_string(i));
        return it->second;
    }

    void check_target(const Tensor& probs, const Target& target, std::span<const double> label_weights) const
    {
        if (probs.rank() != 1 || probs.size() != cfg_.head.arity)
            throw Error(ErrorCode::ArityMismatch, "output arity " + std::to_string(probs.size()) +
                                                      " does not match head arity " + std::to_string(cfg_.head.arity));
        if (cfg_.head.kind == HeadKind::softmax)
        {
            const auto* t = std::get_if<std::size_t>(&target.value);
            if (!t || *t >= probs.size())
                throw Error(ErrorCode::ArityMismatch, "softmax head needs a class index below " + std::to_string(probs.size()));
        }
        else
        {
            const auto* y = std::get_if<std::vector<double>>(&target.value);
            if (!y || y->size() != probs.size())
                throw Error(ErrorCode::ArityMismatch, "target arity " + std::to_string(y ? y->size() : 0) +
                                                          " does not match output arity " + std::to_string(probs.size()));
            if (!label_weights.empty() && label_weights.size() != probs.size())
                throw Error(ErrorCode::ArityMismatch, "label weight count does not match output arity");
        }
    }

    static void maxpool_forward(const Tensor& x, const MaxPool& l, Tensor& y, std::vector<std::size_t>& argmax)
    {
        const auto C = x.dim(0), H = x.dim(1), W = x.dim(2);
        const auto OH = y.dim(1), OW = y.dim(2);
        argmax.assign(y.size(), 0);
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t oy = 0; oy < OH; ++oy)
                for (std::size_t ox = 0; ox < OW; ++ox)
                {
                    std::size_t best = (c * H + oy * l.stride) * W + ox * l.stride;
                    for (std::size_t ky = 0; ky < l.kernel; ++ky)
                        for (std::size_t kx = 0; kx < l.kernel; ++kx)
                        {
                            const auto idx = (c * H + oy * l.stride + ky) * W + ox * l.stride + kx;
                            if (x[idx] > x[best])
                                best = idx;
                        }
                    const auto o = (c * OH + oy) * OW + ox;
                    y[o] = x[best];
                    argmax[o] = best;
                }
    }

    NetworkConfig cfg_;
    std::vector<Shape> shapes_;
    std::string hash_;
};

// ---- free-function surface -------------------------------------------------

inline ForwardResult forward(const NetworkConfig& cfg, const Parameters& params, const Tensor& input)
{
    return Network(cfg).forward(params, input);
}

inline double loss(const NetworkConfig& cfg, const Tensor& output, const Target& target,
                   std::span<const double> label_weights = {})
{
    return Network(cfg).loss(output, target, label_weights);
}

inline GradientSet backward(const NetworkConfig& cfg, const Parameters& params, const ForwardCache& cache,
                            const Target& target, std::span<const double> label_weights = {})
{
    return Network(cfg).backward(params, cache, target, label_weights);
}

/// Mean loss gradient over a batch; samples are reduced in order.
inline GradientSet batch_gradient(const Network& net, const Parameters& params, std::span<const Tensor> inputs,
                                  std::span<const Target> targets, std::span<const double> label_weights = {})
{
    if (inputs.size() != targets.size() || inputs.empty())
        throw Error(ErrorCode::ArityMismatch, "batch inputs and targets differ in length");
    GradientSet total = zeros_like(params);
    const double scale = 1.0 / static_cast<double>(inputs.size());
    for (std::size_t n = 0; n < inputs.size(); ++n)
    {
        const auto r = net.forward(params, inputs[n]);
        accumulate(total, net.backward(params, r.cache, targets[n], label_weights), scale);
    }
    return total;
}

inline constexpr std::size_t kFiniteDiffParamLimit = 10'000;

/// Central-difference gradient, one scalar parameter at a time. Only meant
/// for small networks.
inline GradientSet finite_diff_grad(const NetworkConfig& cfg, const Parameters& params, const Tensor& input,
                                    const Target& target, double epsilon, std::span<const double> label_weights = {})
{
    if (!(epsilon > 0) || !std::isfinite(epsilon))
        throw Error(ErrorCode::InvalidEpsilon, "epsilon must be a positive finite number");
    if (param_count(params) > kFiniteDiffParamLimit)
        throw Error(ErrorCode::TooLargeForOracle, std::to_string(param_count(params)) + " parameters exceed the limit of " +
                                                      std::to_string(kFiniteDiffParamLimit));
    const Network net(cfg);
    net.check_params(params);
    Parameters work = params;
    GradientSet grads = zeros_like(params);
    const auto eval = [&] { return net.loss(net.forward(work, input).output, target, label_weights); };
    for (auto& [idx, p] : work)
    {
        for (auto [tensor, out] : {std::pair{&p.weight, &grads.at(idx).weight}, std::pair{&p.bias, &grads.at(idx).bias}})
        {
            for (std::size_t k = 0; k < tensor->size(); ++k)
            {
                const double orig = (*tensor)[k];
                (*tensor)[k] = orig + epsilon;
                const double up = eval();
                (*tensor)[k] = orig - epsilon;
                const double down = eval();
                (*tensor)[k] = orig;
                (*out)[k] = (up - down) / (2 * epsilon);
            }
        }
    }
    return grads;
}

/// Thresholded label set (sigmoid) or argmax class (softmax, lowest index
/// wins ties).
struct Prediction
{
    std::size_t class_index = 0;
    std::vector<std::uint8_t> labels;
};

inline Prediction predict_labels(const Tensor& output, HeadKind head, double threshold = 0.5)
{
    Prediction p;
    if (head == HeadKind::softmax)
    {
        for (std::size_t k = 1; k < output.size(); ++k)
            if (output[k] > output[p.class_index])
                p.class_index = k;
        return p;
    }
    p.labels.resize(output.size());
    for (std::size_t k = 0; k < output.size(); ++k)
        p.labels[k] = output[k] >= threshold ? 1 : 0;
    return p;
}

}  // namespace bytehue::cnn
