// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bytehue/cnn/tensor.hpp"
#include "bytehue/digest.hpp"
#include "bytehue/error.hpp"
#include "bytehue/hex.hpp"

namespace bytehue {

struct Pixel
{
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Pixels produced from a bytecode, plus the byte count needed to undo the
/// tail padding.
struct PixelSequence
{
    std::vector<Pixel> pixels;
    std::size_t source_len = 0;

    friend bool operator==(const PixelSequence&, const PixelSequence&) = default;
};

/// H x W grid of RGB pixels, row-major.
class ColorImage
{
public:
    ColorImage() = default;

    ColorImage(std::size_t height, std::size_t width, Pixel fill = {})
      : height_(height), width_(width), data_(height * width, fill)
    {
        if (height == 0 || width == 0)
            throw Error(ErrorCode::ShapeMismatch, "image dimensions must be positive");
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    Pixel& at(std::size_t y, std::size_t x) noexcept { return data_[y * width_ + x]; }
    const Pixel& at(std::size_t y, std::size_t x) const noexcept { return data_[y * width_ + x]; }
    const std::vector<Pixel>& pixels() const noexcept { return data_; }
    std::vector<Pixel>& pixels() noexcept { return data_; }

    friend bool operator==(const ColorImage&, const ColorImage&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<Pixel> data_;
};

enum class Layout { square, fixed_width };
enum class ResizeFilter { nearest, bilinear };

struct EncodingConfig
{
    std::uint8_t pad_byte = 0x00;
    Layout layout = Layout::square;
    std::size_t fixed_width = 0;  // used when layout == fixed_width
    std::size_t target_height = 224;
    std::size_t target_width = 224;
    ResizeFilter resize_filter = ResizeFilter::nearest;

    void validate() const
    {
        if (target_height == 0 || target_width == 0)
            throw Error(ErrorCode::InvalidConfig, "target size must be positive");
        if (layout == Layout::fixed_width && fixed_width == 0)
            throw Error(ErrorCode::InvalidConfig, "fixed_width layout needs width >= 1");
    }

    friend bool operator==(const EncodingConfig&, const EncodingConfig&) = default;
};

inline nlohmann::json to_json(const EncodingConfig& cfg)
{
    return {
        {"pad_byte", cfg.pad_byte},
        {"layout", cfg.layout == Layout::square ? "square" : "fixed_width"},
        {"fixed_width", cfg.fixed_width},
        {"target_size", {cfg.target_height, cfg.target_width}},
        {"resize_filter", cfg.resize_filter == ResizeFilter::nearest ? "nearest" : "bilinear"},
    };
}

inline EncodingConfig encoding_from_json(const nlohmann::json& j)
{
    EncodingConfig cfg;
    try
    {
        cfg.pad_byte = j.at("pad_byte").get<std::uint8_t>();
        const auto layout = j.at("layout").get<std::string>();
        if (layout == "square")
            cfg.layout = Layout::square;
        else if (layout == "fixed_width")
            cfg.layout = Layout::fixed_width;
        else
            throw Error(ErrorCode::InvalidConfig, "unknown layout '" + layout + "'");
        cfg.fixed_width = j.at("fixed_width").get<std::size_t>();
        cfg.target_height = j.at("target_size").at(0).get<std::size_t>();
        cfg.target_width = j.at("target_size").at(1).get<std::size_t>();
        const auto filter = j.at("resize_filter").get<std::string>();
        if (filter == "nearest")
            cfg.resize_filter = ResizeFilter::nearest;
        else if (filter == "bilinear")
            cfg.resize_filter = ResizeFilter::bilinear;
        else
            throw Error(ErrorCode::InvalidConfig, "unknown resize filter '" + filter + "'");
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorCode::InvalidConfig, std::string("encoding config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

/// SHA-256 of the canonical JSON form; two models can share inputs only if
/// these match.
inline std::string encoding_hash(const EncodingConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

/// Each consecutive byte triple becomes one (R, G, B) pixel; a 1- or 2-byte
/// tail is completed with cfg.pad_byte.
inline PixelSequence bytes_to_pixels(const Bytecode& code, const EncodingConfig& cfg = {})
{
    const auto& b = code.bytes();
    PixelSequence seq;
    seq.source_len = b.size();
    seq.pixels.reserve((b.size() + 2) / 3);
    for (std::size_t i = 0; i < b.size(); i += 3)
    {
        const auto at = [&](std::size_t k) { return k < b.size() ? b[k] : cfg.pad_byte; };
        seq.pixels.push_back({at(i), at(i + 1), at(i + 2)});
    }
    return seq;
}

inline Bytecode pixels_to_bytes(const PixelSequence& seq, std::size_t max_code_size = kDefaultMaxCodeSize)
{
    const auto n = seq.pixels.size();
    if (seq.source_len == 0 || n != (seq.source_len + 2) / 3)
        throw Error(ErrorCode::InconsistentLength, "source_len " + std::to_string(seq.source_len) +
                                                       " is incompatible with " + std::to_string(n) + " pixels");
    Bytes out;
    out.reserve(n * 3);
    for (const auto& p : seq.pixels)
    {
        out.push_back(p.r);
        out.push_back(p.g);
        out.push_back(p.b);
    }
    out.resize(seq.source_len);
    return Bytecode(std::move(out), max_code_size);
}

/// Lays pixels out row-major; unused tail cells get (pad, pad, pad).
inline ColorImage pixels_to_image(const PixelSequence& seq, const EncodingConfig& cfg = {})
{
    const auto n = seq.pixels.size();
    if (n == 0)
        throw Error(ErrorCode::Empty, "pixel sequence is empty");
    std::size_t width = 0;
    if (cfg.layout == Layout::square)
    {
        width = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
        while (width * width < n)
            ++width;
        while (width > 1 && (width - 1) * (width - 1) >= n)
            --width;
    }
    else
    {
        if (cfg.fixed_width == 0)
            throw Error(ErrorCode::InvalidConfig, "fixed_width layout needs width >= 1");
        width = cfg.fixed_width;
    }
    const auto height = cfg.layout == Layout::square ? width : (n + width - 1) / width;
    ColorImage img(height, width, Pixel{cfg.pad_byte, cfg.pad_byte, cfg.pad_byte});
    std::copy(seq.pixels.begin(), seq.pixels.end(), img.pixels().begin());
    return img;
}

namespace detail {

inline std::size_t nearest_index(std::size_t i, std::size_t src, std::size_t dst)
{
    // floor((i + 0.5) * S / T) in exact integer arithmetic
    const auto idx = ((2 * i + 1) * src) / (2 * dst);
    return std::min(idx, src - 1);
}

// Center-aligned sample position (i + 0.5) * S / T - 0.5, clamped to
// [0, S - 1], held exactly as lo + num / den with den = 2T.
struct BilinearTap
{
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::uint64_t num = 0;
    std::uint64_t den = 1;
};

inline BilinearTap bilinear_tap(std::size_t i, std::size_t src, std::size_t dst)
{
    const auto den = static_cast<std::int64_t>(2 * dst);
    auto pos = static_cast<std::int64_t>((2 * i + 1) * src) - static_cast<std::int64_t>(dst);
    pos = std::clamp<std::int64_t>(pos, 0, static_cast<std::int64_t>(src - 1) * den);
    BilinearTap t;
    t.lo = static_cast<std::size_t>(pos / den);
    t.hi = std::min(t.lo + 1, src - 1);
    t.num = static_cast<std::uint64_t>(pos % den);
    t.den = static_cast<std::uint64_t>(den);
    return t;
}

}  // namespace detail

inline ColorImage resize(const ColorImage& img, const EncodingConfig& cfg = {})
{
    cfg.validate();
    const auto sh = img.height(), sw = img.width();
    const auto th = cfg.target_height, tw = cfg.target_width;
    ColorImage out(th, tw);
    if (cfg.resize_filter == ResizeFilter::nearest)
    {
        std::vector<std::size_t> xs(tw);
        for (std::size_t x = 0; x < tw; ++x)
            xs[x] = detail::nearest_index(x, sw, tw);
        for (std::size_t y = 0; y < th; ++y)
        {
            const auto sy = detail::nearest_index(y, sh, th);
            for (std::size_t x = 0; x < tw; ++x)
                out.at(y, x) = img.at(sy, xs[x]);
        }
        return out;
    }

    std::vector<detail::BilinearTap> xs(tw);
    for (std::size_t x = 0; x < tw; ++x)
        xs[x] = detail::bilinear_tap(x, sw, tw);
    for (std::size_t y = 0; y < th; ++y)
    {
        const auto ty = detail::bilinear_tap(y, sh, th);
        for (std::size_t x = 0; x < tw; ++x)
        {
            const auto& tx = xs[x];
            const auto& p00 = img.at(ty.lo, tx.lo);
            const auto& p01 = img.at(ty.lo, tx.hi);
            const auto& p10 = img.at(ty.hi, tx.lo);
            const auto& p11 = img.at(ty.hi, tx.hi);
            // exact weighted sum over den = (2*tw)*(2*th), rounded half up
            const auto den = tx.den * ty.den;
            const auto mix = [&](std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
                const auto top = a * (tx.den - tx.num) + b * tx.num;
                const auto bottom = c * (tx.den - tx.num) + d * tx.num;
                const auto v = top * (ty.den - ty.num) + bottom * ty.num;
                return static_cast<std::uint8_t>((2 * v + den) / (2 * den));
            };
            out.at(y, x) = {mix(p00.r, p01.r, p10.r, p11.r), mix(p00.g, p01.g, p10.g, p11.g),
                            mix(p00.b, p01.b, p10.b, p11.b)};
        }
    }
    return out;
}

/// Channel-first (3, H, W) tensor with intensities scaled to [0, 1].
inline cnn::Tensor image_to_tensor(const ColorImage& img)
{
    const auto h = img.height(), w = img.width();
    cnn::Tensor t({3, h, w});
    const auto plane = h * w;
    const auto& px = img.pixels();
    for (std::size_t i = 0; i < plane; ++i)
    {
        t[i] = px[i].r / 255.0;
        t[plane + i] = px[i].g / 255.0;
        t[2 * plane + i] = px[i].b / 255.0;
    }
    return t;
}

/// Full pipeline: bytes -> pixels -> layout -> fixed-size image.
inline ColorImage encode(const Bytecode& code, const EncodingConfig& cfg = {})
{
    return resize(pixels_to_image(bytes_to_pixels(code, cfg), cfg), cfg);
}

}  // namespace bytehue
