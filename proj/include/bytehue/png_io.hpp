// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <png.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bytehue/encoder.hpp"
#include "bytehue/error.hpp"

namespace bytehue {

namespace detail {

struct PngImageGuard
{
    png_image* image;
    ~PngImageGuard() { png_image_free(image); }
};

inline std::vector<std::uint8_t> interleave(const ColorImage& img)
{
    std::vector<std::uint8_t> buf;
    buf.reserve(img.pixels().size() * 3);
    for (const auto& p : img.pixels())
    {
        buf.push_back(p.r);
        buf.push_back(p.g);
        buf.push_back(p.b);
    }
    return buf;
}

}  // namespace detail

/// Writes an 8-bit RGB PNG without alpha.
inline void image_to_png(const ColorImage& img, const std::filesystem::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    const auto buf = detail::interleave(img);
    if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr))
    {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::IoError, "cannot write PNG '" + path.string() + "': " + msg);
    }
}

/// In-memory variant of image_to_png.
inline std::vector<std::uint8_t> image_to_png_bytes(const ColorImage& img)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    const auto buf = detail::interleave(img);
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoError, std::string("PNG sizing failed: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoError, std::string("PNG encoding failed: ") + image.message);
    out.resize(size);
    return out;
}

/// Reads an 8-bit RGB PNG. Grayscale, palette, alpha and 16-bit files are
/// rejected with UnsupportedPngVariant rather than converted.
inline ColorImage png_to_image(const std::filesystem::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
    {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::IoError, "cannot read PNG '" + path.string() + "': " + msg);
    }
    detail::PngImageGuard guard{&image};
    if (image.format != PNG_FORMAT_RGB)
        throw Error(ErrorCode::UnsupportedPngVariant,
                    "'" + path.string() + "' is not an 8-bit RGB PNG (format flags " + std::to_string(image.format) + ")");

    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoError, "cannot decode PNG '" + path.string() + "': " + image.message);

    ColorImage img(image.height, image.width);
    auto& px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
    return img;
}

}  // namespace bytehue
