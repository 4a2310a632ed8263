// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0

#include <numeric>

#include <gtest/gtest.h>

#include "bytehue/cnn/config.hpp"
#include "bytehue/cnn/network.hpp"
#include "bytehue/cnn/sgd.hpp"
#include "support.hpp"

using namespace bytehue;
using namespace bytehue::cnn;
using bytehue::test::random_params;
using bytehue::test::random_tensor;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try
    {
        f();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::Empty;
}

NetworkConfig single(std::array<std::size_t, 3> in, std::vector<LayerSpec> layers, Head head)
{
    return {"t", in, std::move(layers), head};
}

Target random_target(const Head& h, SplitMix64& rng)
{
    if (h.kind == HeadKind::softmax)
        return Target::cls(rng.below(h.arity));
    std::vector<double> y(h.arity);
    for (auto& v : y)
        v = static_cast<double>(rng.below(2));
    return {y};
}

}  // namespace

TEST(Config, BytehueMicroShapes)
{
    const auto cfg = bytehue_micro();
    const auto shapes = layer_shapes(cfg);
    ASSERT_EQ(cfg.layers.size(), 12u);
    EXPECT_EQ(shapes[4], (Shape{8, 224, 224}));
    EXPECT_EQ(shapes[5], (Shape{8, 112, 112}));
    EXPECT_EQ(shapes[10], (Shape{16, 56, 56}));
    EXPECT_EQ(shapes[11], (Shape{16}));
    EXPECT_EQ(shapes[12], (Shape{2}));
    EXPECT_EQ(head_layer_index(cfg), 11u);
}

TEST(Config, NinBlockExpansion)
{
    const auto v = nin_block(8, 5);
    ASSERT_EQ(v.size(), 4u);
    EXPECT_EQ(std::get<Conv>(v[0]), (Conv{8, 5, 1, 2}));
    EXPECT_TRUE(std::holds_alternative<ReLU>(v[1]));
    EXPECT_EQ(std::get<Conv>(v[2]), (Conv{8, 1, 1, 0}));
    EXPECT_TRUE(std::holds_alternative<ReLU>(v[3]));
}

TEST(Config, InvalidConfigs)
{
    const Head h{HeadKind::softmax, 2};
    EXPECT_EQ(code_of([&] { validate(single({3, 4, 4}, {Conv{2, 3, 8, 0}, Conv{2, 3, 1, 0}, Flatten{}, Dense{2}}, h)); }),
              ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([&] { validate(single({3, 4, 4}, {Conv{2, 7, 1, 3}, Flatten{}, Dense{2}}, h)); }),
              ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([&] { validate(single({3, 4, 4}, {Dense{2}}, h)); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([&] { validate(single({3, 4, 4}, {Flatten{}, Dense{3}}, h)); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([&] { validate(single({3, 1, 1}, {MaxPool{2, 2}, Flatten{}, Dense{2}}, h)); }),
              ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([&] { init_params(single({3, 2, 2}, {Conv{1, 3, 1, 0}, Flatten{}, Dense{2}}, h), 1); }),
              ErrorCode::InvalidConfig);
}

TEST(Config, JsonRoundTripAndStableHash)
{
    const auto cfg = bytehue_micro({HeadKind::sigmoid, 7}, 64, 48);
    const auto back = network_from_json(to_json(cfg));
    EXPECT_EQ(back, cfg);
    EXPECT_EQ(config_hash(back), config_hash(cfg));
    EXPECT_NE(config_hash(cfg), config_hash(bytehue_micro()));
}

TEST(Config, JsonAcceptsNinMacro)
{
    const auto j = nlohmann::json::parse(R"({
      "name": "m", "input_shape": [3, 8, 8],
      "layers": [{"type": "nin", "out_channels": 4, "kernel": 3}, {"type": "global_avg_pool"}, {"type": "dense", "out_features": 2}],
      "head": {"type": "softmax", "arity": 2}})");
    const auto cfg = network_from_json(j);
    EXPECT_EQ(cfg.layers.size(), 6u);
    EXPECT_EQ(std::get<Conv>(cfg.layers[2]).kernel, 1u);
}

TEST(Init, DeterministicAndHeBounded)
{
    const auto cfg = single({8, 1, 1}, {Flatten{}, Dense{4}}, {HeadKind::sigmoid, 4});
    const auto a = init_params(cfg, 42), b = init_params(cfg, 42);
    EXPECT_EQ(a, b);
    EXPECT_NE(init_params(cfg, 43), a);
    const double bound = std::sqrt(6.0 / 8.0);
    double largest = 0;
    for (const auto v : a.at(1).weight.values())
    {
        EXPECT_LE(std::abs(v), bound);
        largest = std::max(largest, std::abs(v));
    }
    EXPECT_GT(largest, 0.5 * bound);
    for (const auto v : a.at(1).bias.values())
        EXPECT_EQ(v, 0.0);
}

TEST(Forward, ShapeMismatch)
{
    const auto cfg = single({3, 4, 4}, {Flatten{}, Dense{2}}, {HeadKind::softmax, 2});
    const auto p = init_params(cfg, 1);
    EXPECT_EQ(code_of([&] { Network(cfg).forward(p, Tensor({3, 4, 5})); }), ErrorCode::ShapeMismatch);
}

TEST(Forward, PointwiseIdentityMix)
{
    // 1x1 conv with the identity across channels reproduces its input
    const NetworkConfig cfg{"t", {3, 3, 3}, {Conv{3, 1, 1, 0}, Flatten{}, Dense{2}}, {HeadKind::softmax, 2}};
    auto p = init_params(cfg, 1);
    std::fill(p[0].weight.values().begin(), p[0].weight.values().end(), 0.0);
    for (std::size_t c = 0; c < 3; ++c)
        p[0].weight[c * 3 + c] = 1.0;
    SplitMix64 rng(2);
    const auto x = random_tensor({3, 3, 3}, rng);
    const auto r = Network(cfg).forward(p, x);
    EXPECT_EQ(r.cache.activations[1], x);
}

TEST(Forward, DeltaKernel)
{
    const NetworkConfig cfg{"t", {1, 5, 6}, {Conv{1, 3, 1, 1}, Flatten{}, Dense{2}}, {HeadKind::softmax, 2}};
    auto p = init_params(cfg, 1);
    std::fill(p[0].weight.values().begin(), p[0].weight.values().end(), 0.0);
    p[0].weight[4] = 1.0;
    SplitMix64 rng(3);
    const auto x = random_tensor({1, 5, 6}, rng);
    EXPECT_EQ(Network(cfg).forward(p, x).cache.activations[1], x);
}

TEST(Forward, MaxPoolConstant)
{
    const NetworkConfig cfg{"t", {2, 4, 4}, {MaxPool{2, 2}, Flatten{}, Dense{2}}, {HeadKind::softmax, 2}};
    const auto r = Network(cfg).forward(init_params(cfg, 1), Tensor({2, 4, 4}, 0.7));
    for (const auto v : r.cache.activations[1].values())
        EXPECT_EQ(v, 0.7);
}

TEST(Forward, HeadsNormalised)
{
    SplitMix64 rng(4);
    for (int n = 0; n < 30; ++n)
    {
        const auto soft = bytehue::test::gradient_suite({HeadKind::softmax, 4})[n % 9];
        const auto out = Network(soft).forward(random_params(soft, n), random_tensor(
            {soft.input_shape[0], soft.input_shape[1], soft.input_shape[2]}, rng, -5, 5)).output;
        EXPECT_NEAR(std::accumulate(out.values().begin(), out.values().end(), 0.0), 1.0, 1e-6);

        const auto sig = bytehue::test::gradient_suite({HeadKind::sigmoid, 4})[n % 9];
        const auto o2 = Network(sig).forward(random_params(sig, n), random_tensor(
            {sig.input_shape[0], sig.input_shape[1], sig.input_shape[2]}, rng, -5, 5)).output;
        for (const auto v : o2.values())
        {
            EXPECT_GT(v, 0.0);
            EXPECT_LT(v, 1.0);
        }
    }
}

TEST(Forward, PointwiseConvMatchesMatrixOracle)
{
    SplitMix64 rng(5);
    for (int n = 0; n < 20; ++n)
    {
        const auto cin = 1 + rng.below(6), cout = 1 + rng.below(6), h = 1 + rng.below(9), w = 1 + rng.below(9);
        const NetworkConfig cfg{"t", {cin, h, w}, {Conv{cout, 1, 1, 0}, Flatten{}, Dense{2}}, {HeadKind::softmax, 2}};
        const auto p = random_params(cfg, n);
        const auto x = random_tensor({cin, h, w}, rng);
        const auto y = Network(cfg).forward(p, x).cache.activations[1];
        for (std::size_t yy = 0; yy < h; ++yy)
            for (std::size_t xx = 0; xx < w; ++xx)
                for (std::size_t o = 0; o < cout; ++o)
                {
                    double s = p.at(0).bias[o];
                    for (std::size_t c = 0; c < cin; ++c)
                        s += p.at(0).weight[o * cin + c] * x.at(c, yy, xx);
                    ASSERT_NEAR(y.at(o, yy, xx), s, 1e-12);
                }
    }
}

TEST(Forward, ConvolutionTranslationProperty)
{
    // shifting the input by (dy, dx) shifts the stride-1 zero-padded
    // output by the same amount away from the borders
    SplitMix64 rng(6);
    for (const std::size_t k : {1, 3, 5})
    {
        const std::size_t H = 10, W = 11, pad = k / 2, dy = 2, dx = 1;
        const NetworkConfig cfg{"t", {2, H, W}, {Conv{3, k, 1, pad}, Flatten{}, Dense{2}}, {HeadKind::softmax, 2}};
        const auto p = random_params(cfg, k);
        const Network net(cfg);
        const auto x = random_tensor({2, H, W}, rng);
        Tensor shifted({2, H, W});
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t y = dy; y < H; ++y)
                for (std::size_t xx = dx; xx < W; ++xx)
                    shifted.at(c, y, xx) = x.at(c, y - dy, xx - dx);
        const auto a = net.forward(p, x).cache.activations[1];
        const auto b = net.forward(p, shifted).cache.activations[1];
        for (std::size_t o = 0; o < 3; ++o)
            for (std::size_t y = dy + pad; y + pad < H; ++y)
                for (std::size_t xx = dx + pad; xx + pad < W; ++xx)
                    ASSERT_NEAR(b.at(o, y, xx), a.at(o, y - dy, xx - dx), 1e-12);
    }
}

TEST(Loss, Values)
{
    const Network soft(single({3, 1, 1}, {Flatten{}, Dense{3}}, {HeadKind::softmax, 3}));
    EXPECT_LE(soft.loss(Tensor({3}, std::vector<double>{0, 1, 0}), Target::cls(1)), 1e-9);

    const Network sig(single({3, 1, 1}, {Flatten{}, Dense{5}}, {HeadKind::sigmoid, 5}));
    EXPECT_NEAR(sig.loss(Tensor({5}, 0.5), Target{std::vector<double>{1, 0, 1, 1, 0}}), 5 * std::log(2.0), 1e-12);

    // the weight multiplies only the positive term
    const std::vector<double> w{3, 3, 3, 3, 3};
    EXPECT_NEAR(sig.loss(Tensor({5}, 0.5), Target{std::vector<double>{1, 0, 0, 0, 0}}, w), (3 + 4) * std::log(2.0), 1e-12);
}

TEST(Loss, ClampedAtExtremes)
{
    const Network soft(single({3, 1, 1}, {Flatten{}, Dense{2}}, {HeadKind::softmax, 2}));
    EXPECT_NEAR(soft.loss(Tensor({2}, std::vector<double>{1, 0}), Target::cls(1)), -std::log(1e-12), 1e-9);
}

TEST(Loss, ArityMismatch)
{
    const Network sig(single({3, 1, 1}, {Flatten{}, Dense{4}}, {HeadKind::sigmoid, 4}));
    EXPECT_EQ(code_of([&] { sig.loss(Tensor({4}, 0.5), Target{std::vector<double>(5, 1.0)}); }), ErrorCode::ArityMismatch);
    const Network soft(single({3, 1, 1}, {Flatten{}, Dense{4}}, {HeadKind::softmax, 4}));
    EXPECT_EQ(code_of([&] { soft.loss(Tensor({4}, 0.25), Target::cls(4)); }), ErrorCode::ArityMismatch);
}

TEST(Backward, MatchesFiniteDifferences)
{
    SplitMix64 rng(7);
    for (const auto head : {Head{HeadKind::softmax, 3}, Head{HeadKind::sigmoid, 3}})
        for (const auto& cfg : bytehue::test::gradient_suite(head))
            for (std::uint64_t seed = 0; seed < 5; ++seed)
            {
                const auto p = random_params(cfg, seed);
                const auto x = random_tensor({cfg.input_shape[0], cfg.input_shape[1], cfg.input_shape[2]}, rng);
                const auto t = random_target(head, rng);
                std::vector<double> w;
                if (head.kind == HeadKind::sigmoid)
                    w = {1.0, 2.5, 7.0};
                const Network net(cfg);
                const auto g = net.backward(p, net.forward(p, x).cache, t, w);
                const auto fd = finite_diff_grad(cfg, p, x, t, 1e-5, w);
                EXPECT_LT(bytehue::test::max_relative_error(g, fd), 1e-4) << cfg.name;
            }
}

TEST(Backward, ZeroSignalWhenTargetEqualsOutput)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::sigmoid, 3})[4];
    const auto p = random_params(cfg, 1);
    SplitMix64 rng(8);
    const auto x = random_tensor({3, 4, 4}, rng);
    const Network net(cfg);
    const auto r = net.forward(p, x);
    const auto g = net.backward(p, r.cache, Target::multi(r.output.values()));
    EXPECT_LT(l2_norm(g), 1e-12);
}

TEST(Backward, DuplicatedSampleEqualsSingle)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::softmax, 3})[5];
    const auto p = random_params(cfg, 2);
    SplitMix64 rng(9);
    const auto x = random_tensor({3, 4, 4}, rng);
    const Network net(cfg);
    const std::vector<Tensor> xs{x, x};
    const std::vector<Target> ts{Target::cls(2), Target::cls(2)};
    const auto batch = batch_gradient(net, p, xs, ts);
    const auto one = net.backward(p, net.forward(p, x).cache, Target::cls(2));
    for (const auto& [idx, lp] : one)
    {
        for (std::size_t k = 0; k < lp.weight.size(); ++k)
            EXPECT_NEAR(batch.at(idx).weight[k], lp.weight[k], 1e-15);
        for (std::size_t k = 0; k < lp.bias.size(); ++k)
            EXPECT_NEAR(batch.at(idx).bias[k], lp.bias[k], 1e-15);
    }
}

TEST(Backward, StaleCache)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::softmax, 3})[1];
    auto p = random_params(cfg, 3);
    const Network net(cfg);
    const auto r = net.forward(p, Tensor({3, 4, 4}, 0.1));
    p.at(0).weight[0] += 1.0;
    EXPECT_EQ(code_of([&] { net.backward(p, r.cache, Target::cls(0)); }), ErrorCode::StaleCache);
    const Network other(bytehue::test::gradient_suite({HeadKind::softmax, 3})[0]);
    EXPECT_EQ(code_of([&] { other.backward(random_params(other.config(), 1), r.cache, Target::cls(0)); }),
              ErrorCode::StaleCache);
}

TEST(Backward, PartialFromStartLayerMatchesFull)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::sigmoid, 3})[8];
    const auto p = random_params(cfg, 4);
    SplitMix64 rng(10);
    const auto x = random_tensor({3, 4, 4}, rng);
    const Target t{std::vector<double>{1, 0, 1}};
    const Network net(cfg);
    const auto full = net.backward(p, net.forward(p, x).cache, t);
    const std::size_t start = 4;
    const auto mid = net.activation_at(p, x, start);
    const auto part = net.backward(p, net.forward(p, mid, start).cache, t, {}, start);
    ASSERT_EQ(part.size(), 1u);
    EXPECT_EQ(part.begin()->first, 6u);
    EXPECT_EQ(part.at(6), full.at(6));
}

TEST(FiniteDiff, Guards)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::softmax, 3})[0];
    const auto p = random_params(cfg, 1);
    const Tensor x({3, 4, 4}, 0.5);
    EXPECT_EQ(code_of([&] { finite_diff_grad(cfg, p, x, Target::cls(0), 0.0); }), ErrorCode::InvalidEpsilon);
    EXPECT_EQ(code_of([&] { finite_diff_grad(cfg, p, x, Target::cls(0), -1e-5); }), ErrorCode::InvalidEpsilon);
    const auto big = bytehue_micro({HeadKind::softmax, 2}, 8, 8);
    const NetworkConfig wide{"w", {3, 4, 4}, {Flatten{}, Dense{300}, Dense{2}}, {HeadKind::softmax, 2}};
    EXPECT_EQ(code_of([&] { finite_diff_grad(wide, init_params(wide, 1), x, Target::cls(0), 1e-5); }),
              ErrorCode::TooLargeForOracle);
    EXPECT_NO_THROW(finite_diff_grad(big, init_params(big, 1), Tensor({3, 8, 8}, 0.5), Target::cls(0), 1e-5));
}

TEST(Sgd, LearningRateZeroKeepsParams)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::softmax, 3})[2];
    const auto p = random_params(cfg, 1);
    auto g = zeros_like(p);
    for (auto& [_, lp] : g)
        std::fill(lp.weight.values().begin(), lp.weight.values().end(), 0.3);
    Sgd opt(0.9, 0.01);
    EXPECT_EQ(sgd_step(opt, p, g, 0.0), p);
}

TEST(Sgd, PlainStepAndMomentumRecurrence)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::softmax, 3})[0];
    const auto p0 = random_params(cfg, 1);
    SplitMix64 rng(11);
    auto g = zeros_like(p0);
    for (auto& [_, lp] : g)
        for (auto* t : {&lp.weight, &lp.bias})
            for (auto& v : t->values())
                v = rng.uniform(-1, 1);

    Sgd plain(0.0, 0.0);
    const auto p1 = sgd_step(plain, p0, g, 0.1);
    for (const auto& [idx, lp] : p1)
        for (std::size_t k = 0; k < lp.weight.size(); ++k)
            EXPECT_EQ(lp.weight[k], p0.at(idx).weight[k] - 0.1 * g.at(idx).weight[k]);

    const double m = 0.9, lr = 0.05;
    Sgd mom(m, 0.0);
    const auto a = sgd_step(mom, p0, g, lr);
    const auto b = sgd_step(mom, a, g, lr);
    for (const auto& [idx, lp] : b)
        for (std::size_t k = 0; k < lp.weight.size(); ++k)
            EXPECT_NEAR(a.at(idx).weight[k] - lp.weight[k], lr * (1 + m) * g.at(idx).weight[k], 1e-15);
}

TEST(Sgd, WeightDecayAndShapeCheck)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::softmax, 3})[0];
    const auto p = random_params(cfg, 1);
    Sgd opt(0.0, 0.5);
    const auto q = sgd_step(opt, p, zeros_like(p), 0.1);
    EXPECT_DOUBLE_EQ(q.at(0).weight[0], p.at(0).weight[0] * (1 - 0.05));

    auto bad = zeros_like(p);
    bad.at(0).weight = Tensor({1});
    Sgd o2;
    EXPECT_EQ(code_of([&] { sgd_step(o2, p, bad, 0.1); }), ErrorCode::ShapeMismatch);
}

TEST(Sgd, Deterministic)
{
    const auto cfg = bytehue::test::gradient_suite({HeadKind::softmax, 3})[8];
    const Network net(cfg);
    const auto run = [&] {
        auto p = init_params(cfg, 5);
        Sgd opt;
        SplitMix64 rng(12);
        for (int s = 0; s < 20; ++s)
        {
            const auto x = random_tensor({3, 4, 4}, rng);
            opt.step(p, net.backward(p, net.forward(p, x).cache, Target::cls(rng.below(3))), 0.05);
        }
        return param_checksum(p);
    };
    EXPECT_EQ(run(), run());
}

TEST(Predict, Thresholds)
{
    const auto p = predict_labels(Tensor({3}, std::vector<double>{0.9, 0.2, 0.5}), HeadKind::sigmoid);
    EXPECT_EQ(p.labels, (std::vector<std::uint8_t>{1, 0, 1}));
    EXPECT_EQ(predict_labels(Tensor({3}, std::vector<double>{0.25, 0.5, 0.25}), HeadKind::softmax).class_index, 1u);
    EXPECT_EQ(predict_labels(Tensor({2}, std::vector<double>{0.5, 0.5}), HeadKind::softmax).class_index, 0u);
}
