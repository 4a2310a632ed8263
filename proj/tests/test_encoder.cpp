// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>
#include <png.h>

#include "bytehue/encoder.hpp"
#include "bytehue/png_io.hpp"
#include "bytehue/rng.hpp"

using namespace bytehue;

namespace {

std::vector<Pixel> px(std::initializer_list<std::array<int, 3>> list)
{
    std::vector<Pixel> out;
    for (const auto& p : list)
        out.push_back({static_cast<std::uint8_t>(p[0]), static_cast<std::uint8_t>(p[1]), static_cast<std::uint8_t>(p[2])});
    return out;
}

ColorImage random_image(std::size_t h, std::size_t w, SplitMix64& rng)
{
    ColorImage img(h, w);
    for (auto& p : img.pixels())
        p = {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
             static_cast<std::uint8_t>(rng.below(256))};
    return img;
}

Bytes random_bytes(std::size_t n, SplitMix64& rng)
{
    Bytes b(n);
    for (auto& x : b)
        x = static_cast<std::uint8_t>(rng.below(256));
    return b;
}

EncodingConfig target(std::size_t h, std::size_t w, ResizeFilter f = ResizeFilter::nearest)
{
    EncodingConfig c;
    c.target_height = h;
    c.target_width = w;
    c.resize_filter = f;
    return c;
}

std::filesystem::path temp_path(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("bytehue_test_" + std::to_string(::getpid()) + "_" + name);
}

// Independent bilinear oracle in exact rational arithmetic: the sample
// point along an axis is u = (2i + 1) S / (2T) - 1/2, clamped to [0, S-1].
struct Rational
{
    long long num, den;
};

Pixel bilinear_oracle(const ColorImage& img, std::size_t y, std::size_t x, std::size_t th, std::size_t tw)
{
    const auto axis = [](std::size_t i, std::size_t S, std::size_t T) {
        long long n = static_cast<long long>((2 * i + 1) * S) - static_cast<long long>(T);
        const long long d = 2 * static_cast<long long>(T);
        n = std::max(0LL, std::min(n, static_cast<long long>(S - 1) * d));
        return Rational{n, d};
    };
    const auto u = axis(x, img.width(), tw), v = axis(y, img.height(), th);
    const auto x0 = static_cast<std::size_t>(u.num / u.den), y0 = static_cast<std::size_t>(v.num / v.den);
    const auto x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
    const long long fx = u.num - static_cast<long long>(x0) * u.den, fy = v.num - static_cast<long long>(y0) * v.den;
    const long long den = u.den * v.den;
    const auto channel = [&](auto get) {
        const long long w00 = (u.den - fx) * (v.den - fy), w01 = fx * (v.den - fy), w10 = (u.den - fx) * fy,
                        w11 = fx * fy;
        const long long s = w00 * get(img.at(y0, x0)) + w01 * get(img.at(y0, x1)) + w10 * get(img.at(y1, x0)) +
                            w11 * get(img.at(y1, x1));
        // round half up: floor(s / den + 1/2)
        return static_cast<std::uint8_t>((2 * s + den) / (2 * den));
    };
    return {channel([](const Pixel& p) { return p.r; }), channel([](const Pixel& p) { return p.g; }),
            channel([](const Pixel& p) { return p.b; })};
}

}  // namespace

TEST(BytesToPixels, WorkedExample)
{
    const auto seq = bytes_to_pixels(parse_hex("606060405260"));
    EXPECT_EQ(seq.pixels, px({{96, 96, 96}, {64, 82, 96}}));
    EXPECT_EQ(seq.source_len, 6u);
}

TEST(BytesToPixels, DirectConversion)
{
    EXPECT_EQ(bytes_to_pixels(parse_hex("00357c")).pixels, px({{0, 53, 124}}));
}

TEST(BytesToPixels, PadsTail)
{
    EXPECT_EQ(bytes_to_pixels(parse_hex("6060")).pixels, px({{96, 96, 0}}));
    EncodingConfig c;
    c.pad_byte = 0xab;
    EXPECT_EQ(bytes_to_pixels(parse_hex("60"), c).pixels, px({{96, 0xab, 0xab}}));
}

TEST(PixelsToBytes, Inverse)
{
    EXPECT_EQ(to_hex(pixels_to_bytes({px({{96, 96, 96}, {64, 82, 96}}), 6})), "606060405260");
    EXPECT_EQ(to_hex(pixels_to_bytes({px({{96, 96, 0}}), 2})), "6060");
}

TEST(PixelsToBytes, InconsistentLength)
{
    try
    {
        pixels_to_bytes({px({{96, 96, 0}}), 9});
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::InconsistentLength);
    }
    EXPECT_THROW(pixels_to_bytes({px({{96, 96, 0}}), 0}), Error);
}

TEST(BytesToPixels, RoundTripAndCountLaw)
{
    SplitMix64 rng(1);
    for (int n = 0; n < 1000; ++n)
    {
        // bias towards short inputs but cover the full range
        const auto len = n % 4 == 0 ? 1 + rng.below(kDefaultMaxCodeSize) : 1 + rng.below(64);
        const Bytecode b(random_bytes(len, rng));
        const auto seq = bytes_to_pixels(b);
        ASSERT_EQ(seq.pixels.size(), (len + 2) / 3);
        ASSERT_EQ(pixels_to_bytes(seq).bytes(), b.bytes());
    }
}

TEST(PixelsToImage, SquareLayout)
{
    EncodingConfig c;
    c.pad_byte = 7;
    const auto img = pixels_to_image({px({{1, 1, 1}, {2, 2, 2}, {3, 3, 3}, {4, 4, 4}, {5, 5, 5}}), 15}, c);
    ASSERT_EQ(img.height(), 3u);
    ASSERT_EQ(img.width(), 3u);
    EXPECT_EQ(img.at(1, 1), (Pixel{5, 5, 5}));
    for (std::size_t i = 5; i < 9; ++i)
        EXPECT_EQ(img.pixels()[i], (Pixel{7, 7, 7}));

    const auto one = pixels_to_image({px({{9, 8, 7}}), 3});
    EXPECT_EQ(one.height(), 1u);
    EXPECT_EQ(one.width(), 1u);
}

TEST(PixelsToImage, SquareSideIsCeilSqrt)
{
    for (std::size_t n = 1; n < 3000; ++n)
    {
        const auto img = pixels_to_image({std::vector<Pixel>(n), 3 * n});
        const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<long double>(n))));
        ASSERT_EQ(img.width(), side) << n;
        ASSERT_EQ(img.height(), side) << n;
    }
}

TEST(PixelsToImage, FixedWidth)
{
    EncodingConfig c;
    c.layout = Layout::fixed_width;
    c.fixed_width = 4;
    const auto img = pixels_to_image({std::vector<Pixel>(6, Pixel{1, 2, 3}), 18}, c);
    EXPECT_EQ(img.height(), 2u);
    EXPECT_EQ(img.width(), 4u);
    EXPECT_EQ(img.at(1, 1), (Pixel{1, 2, 3}));
    EXPECT_EQ(img.at(1, 2), (Pixel{0, 0, 0}));
    EXPECT_EQ(img.at(1, 3), (Pixel{0, 0, 0}));

    c.fixed_width = 0;
    EXPECT_THROW(pixels_to_image({std::vector<Pixel>(6), 18}, c), Error);
}

TEST(Resize, NearestIdentity)
{
    SplitMix64 rng(2);
    for (const auto& [h, w] : {std::pair{1, 1}, {5, 7}, {16, 16}, {224, 224}})
    {
        const auto img = random_image(h, w, rng);
        EXPECT_EQ(resize(img, target(h, w)), img);
    }
}

TEST(Resize, NearestTwoByTwoToFourByFour)
{
    ColorImage img(2, 2);
    img.at(0, 0) = {1, 0, 0};
    img.at(0, 1) = {2, 0, 0};
    img.at(1, 0) = {3, 0, 0};
    img.at(1, 1) = {4, 0, 0};
    const auto out = resize(img, target(4, 4));
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x)
            EXPECT_EQ(out.at(y, x).r, 1 + 2 * (y / 2) + x / 2) << y << "," << x;
}

TEST(Resize, NearestMatchesIndexFormula)
{
    SplitMix64 rng(3);
    for (int n = 0; n < 50; ++n)
    {
        const auto sh = 1 + rng.below(40), sw = 1 + rng.below(40), th = 1 + rng.below(60), tw = 1 + rng.below(60);
        const auto img = random_image(sh, sw, rng);
        const auto out = resize(img, target(th, tw));
        for (std::size_t y = 0; y < th; ++y)
            for (std::size_t x = 0; x < tw; ++x)
            {
                const auto sy = std::min<std::size_t>(
                    static_cast<std::size_t>(std::floor((y + 0.5L) * sh / static_cast<long double>(th))), sh - 1);
                const auto sx = std::min<std::size_t>(
                    static_cast<std::size_t>(std::floor((x + 0.5L) * sw / static_cast<long double>(tw))), sw - 1);
                ASSERT_EQ(out.at(y, x), img.at(sy, sx));
            }
    }
}

TEST(Resize, SinglePixelFillsTarget)
{
    ColorImage img(1, 1, Pixel{10, 20, 30});
    for (const auto f : {ResizeFilter::nearest, ResizeFilter::bilinear})
    {
        const auto out = resize(img, target(13, 224, f));
        for (const auto& p : out.pixels())
            ASSERT_EQ(p, (Pixel{10, 20, 30}));
    }
}

TEST(Resize, MonochromePreserved)
{
    SplitMix64 rng(4);
    for (int n = 0; n < 40; ++n)
    {
        const Pixel c{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                      static_cast<std::uint8_t>(rng.below(256))};
        const ColorImage img(1 + rng.below(30), 1 + rng.below(30), c);
        for (const auto f : {ResizeFilter::nearest, ResizeFilter::bilinear})
        {
            const auto out = resize(img, target(1 + rng.below(50), 1 + rng.below(50), f));
            for (const auto& p : out.pixels())
                ASSERT_EQ(p, c);
        }
    }
}

TEST(Resize, BilinearIdentityAtSameSize)
{
    SplitMix64 rng(5);
    const auto img = random_image(9, 11, rng);
    EXPECT_EQ(resize(img, target(9, 11, ResizeFilter::bilinear)), img);
}

TEST(Resize, BilinearHandExample)
{
    // 1x2 row (0, 100) stretched to width 4: sample points -0.25, 0.25,
    // 0.75, 1.25 clamp to 0, 0.25, 0.75, 1 -> 0, 25, 75, 100.
    ColorImage img(1, 2);
    img.at(0, 0) = {0, 0, 0};
    img.at(0, 1) = {100, 1, 3};
    const auto out = resize(img, target(1, 4, ResizeFilter::bilinear));
    EXPECT_EQ(out.at(0, 0), (Pixel{0, 0, 0}));
    EXPECT_EQ(out.at(0, 1).r, 25);
    EXPECT_EQ(out.at(0, 2).r, 75);
    EXPECT_EQ(out.at(0, 3), (Pixel{100, 1, 3}));
    // 0.25 * 1 = 0.25 -> 0, 0.75 * 1 -> 1, 0.25 * 3 = 0.75 -> 1, 0.75 * 3 = 2.25 -> 2
    EXPECT_EQ(out.at(0, 1).g, 0);
    EXPECT_EQ(out.at(0, 2).g, 1);
    EXPECT_EQ(out.at(0, 1).b, 1);
    EXPECT_EQ(out.at(0, 2).b, 2);
}

TEST(Resize, BilinearRoundsHalfUp)
{
    // midpoint of 0 and 1 is exactly 0.5
    ColorImage img(1, 2);
    img.at(0, 0) = {0, 0, 0};
    img.at(0, 1) = {1, 1, 1};
    const auto out = resize(img, target(1, 3, ResizeFilter::bilinear));
    EXPECT_EQ(out.at(0, 1).r, 1);
}

TEST(Resize, BilinearMatchesRationalOracle)
{
    SplitMix64 rng(6);
    for (int n = 0; n < 60; ++n)
    {
        const auto sh = 1 + rng.below(20), sw = 1 + rng.below(20), th = 1 + rng.below(40), tw = 1 + rng.below(40);
        const auto img = random_image(sh, sw, rng);
        const auto out = resize(img, target(th, tw, ResizeFilter::bilinear));
        for (std::size_t y = 0; y < th; ++y)
            for (std::size_t x = 0; x < tw; ++x)
                ASSERT_EQ(out.at(y, x), bilinear_oracle(img, y, x, th, tw)) << sh << "x" << sw << "->" << th << "x" << tw;
    }
}

TEST(ImageToTensor, Scaling)
{
    const auto t = image_to_tensor(ColorImage(1, 1, Pixel{255, 0, 0}));
    EXPECT_EQ(t.shape(), (cnn::Shape{3, 1, 1}));
    EXPECT_EQ(std::vector<double>(t.values().begin(), t.values().end()), (std::vector<double>{1.0, 0.0, 0.0}));

    const auto zeros = image_to_tensor(ColorImage(4, 5));
    for (const auto v : zeros.values())
        EXPECT_EQ(v, 0.0);

    const auto g = image_to_tensor(ColorImage(1, 1, Pixel{96, 96, 96}));
    for (const auto v : g.values())
        EXPECT_NEAR(v, 0.376470588, 1e-9);
}

TEST(ImageToTensor, ChannelFirstLayout)
{
    ColorImage img(2, 3);
    img.at(1, 2) = {10, 20, 30};
    const auto t = image_to_tensor(img);
    EXPECT_DOUBLE_EQ(t.at(0, 1, 2), 10 / 255.0);
    EXPECT_DOUBLE_EQ(t.at(1, 1, 2), 20 / 255.0);
    EXPECT_DOUBLE_EQ(t.at(2, 1, 2), 30 / 255.0);
}

TEST(Encode, DefaultTargetAndDeterminism)
{
    SplitMix64 rng(7);
    const Bytecode b(random_bytes(5000, rng));
    const auto a = encode(b);
    EXPECT_EQ(a.height(), 224u);
    EXPECT_EQ(a.width(), 224u);
    EXPECT_EQ(encode(b), a);
    EXPECT_EQ(image_to_png_bytes(a), image_to_png_bytes(encode(b)));
}

TEST(EncodingConfig, JsonRoundTripAndHash)
{
    EncodingConfig c;
    c.layout = Layout::fixed_width;
    c.fixed_width = 64;
    c.resize_filter = ResizeFilter::bilinear;
    c.pad_byte = 3;
    EXPECT_EQ(encoding_from_json(to_json(c)), c);
    EXPECT_NE(encoding_hash(c), encoding_hash(EncodingConfig{}));
    EXPECT_EQ(encoding_hash(EncodingConfig{}), encoding_hash(EncodingConfig{}));
}

TEST(Png, RoundTrip)
{
    SplitMix64 rng(8);
    const auto img = random_image(16, 16, rng);
    const auto path = temp_path("rt.png");
    image_to_png(img, path);
    EXPECT_EQ(png_to_image(path), img);
    std::filesystem::remove(path);
}

TEST(Png, GrayscaleRejected)
{
    const auto path = temp_path("gray.png");
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = 4;
    image.height = 4;
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(16, 128);
    ASSERT_TRUE(png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr));
    try
    {
        png_to_image(path);
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedPngVariant);
    }
    std::filesystem::remove(path);
}

TEST(Png, MissingFileIsIoError)
{
    try
    {
        png_to_image(temp_path("does_not_exist.png"));
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

#ifdef BYTEHUE_TEST_PYTHON
TEST(Png, DecodableByIndependentReader)
{
    // 27-byte legacy-compiler prefix -> 9 pixels -> 3x3 image
    const auto code = parse_hex("6060604052361561011b5760e060020a600035046301cb3b2081");
    const auto img = pixels_to_image(bytes_to_pixels(code));
    ASSERT_EQ(img.height(), 3u);
    const auto path = temp_path("prefix.png");
    image_to_png(img, path);

    const std::string cmd = std::string(BYTEHUE_TEST_PYTHON) +
                            " -c \"import sys; from PIL import Image; im = Image.open(sys.argv[1]); "
                            "print(im.mode, im.size[0], im.size[1], *[v for p in im.getdata() for v in p])\" " +
                            path.string() + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    ASSERT_NE(pipe, nullptr);
    std::string output;
    char chunk[256];
    while (fgets(chunk, sizeof chunk, pipe))
        output += chunk;
    const int status = pclose(pipe);
    std::filesystem::remove(path);
    if (status != 0)
        GTEST_SKIP() << "Pillow not available";

    std::istringstream in(output);
    std::string mode;
    std::size_t w = 0, h = 0;
    in >> mode >> w >> h;
    EXPECT_EQ(mode, "RGB");
    EXPECT_EQ(w, 3u);
    EXPECT_EQ(h, 3u);
    for (const auto& p : img.pixels())
    {
        int r, g, b;
        in >> r >> g >> b;
        EXPECT_EQ((Pixel{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)}), p);
    }
}
#endif
