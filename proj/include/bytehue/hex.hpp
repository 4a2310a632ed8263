// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bytehue/error.hpp"

namespace bytehue {

using Bytes = std::vector<std::uint8_t>;

/// Twice the EVM runtime-code cap (24,576), so creation bytecode fits too.
inline constexpr std::size_t kDefaultMaxCodeSize = 49'152;

/// A contract's compiled code. Never empty and never above the size cap it
/// was constructed with.
class Bytecode
{
public:
    explicit Bytecode(Bytes bytes, std::size_t max_code_size = kDefaultMaxCodeSize)
      : bytes_(std::move(bytes))
    {
        if (bytes_.empty())
            throw Error(ErrorCode::Empty, "bytecode is empty");
        if (bytes_.size() > max_code_size)
            throw Error(ErrorCode::TooLarge, "bytecode has " + std::to_string(bytes_.size()) +
                                                 " bytes, limit is " + std::to_string(max_code_size));
    }

    const Bytes& bytes() const noexcept { return bytes_; }
    std::size_t size() const noexcept { return bytes_.size(); }
    std::span<const std::uint8_t> view() const noexcept { return bytes_; }

    friend bool operator==(const Bytecode&, const Bytecode&) = default;

private:
    Bytes bytes_;
};

namespace detail {

constexpr int hex_value(char c) noexcept
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

constexpr bool is_space(char c) noexcept
{
    return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\v' || c == '\f';
}

}  // namespace detail

/// Decodes a raw hex dump: an optional leading "0x"/"0X" (after leading
/// whitespace), whitespace anywhere, digits in either case.
/// NonHexCharacter reports the offending index into the original text.
inline Bytecode parse_hex(std::string_view text, std::size_t max_code_size = kDefaultMaxCodeSize)
{
    std::size_t start = 0;
    while (start < text.size() && detail::is_space(text[start]))
        ++start;
    if (text.size() - start >= 2 && text[start] == '0' && (text[start + 1] == 'x' || text[start + 1] == 'X'))
        start += 2;

    std::string digits;
    digits.reserve(text.size() - start);
    for (std::size_t i = start; i < text.size(); ++i)
    {
        const char c = text[i];
        if (detail::is_space(c))
            continue;
        if (detail::hex_value(c) < 0)
            throw Error(ErrorCode::NonHexCharacter,
                        "non-hex character at index " + std::to_string(i), static_cast<long long>(i));
        digits.push_back(c);
    }
    if (digits.empty())
        throw Error(ErrorCode::Empty, "no hex digits in input");
    if (digits.size() % 2 != 0)
        throw Error(ErrorCode::OddLength, "odd number of hex digits (" + std::to_string(digits.size()) + ")");
    if (digits.size() / 2 > max_code_size)
        throw Error(ErrorCode::TooLarge, "bytecode has " + std::to_string(digits.size() / 2) +
                                             " bytes, limit is " + std::to_string(max_code_size));

    Bytes out(digits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(detail::hex_value(digits[2 * i]) << 4 | detail::hex_value(digits[2 * i + 1]));
    return Bytecode(std::move(out), max_code_size);
}

/// Lowercase hex without prefix.
inline std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (const auto b : bytes)
    {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

inline std::string to_hex(const Bytecode& code) { return to_hex(code.view()); }

}  // namespace bytehue
