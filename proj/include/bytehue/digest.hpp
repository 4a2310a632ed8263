// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bytehue/hex.hpp"

namespace bytehue {

/// Incremental SHA-256 over OpenSSL's EVP interface.
class Sha256
{
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free)
    {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("SHA-256 initialisation failed");
    }

    Sha256& update(std::span<const std::uint8_t> data)
    {
        EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
        return *this;
    }

    Sha256& update(std::string_view text)
    {
        EVP_DigestUpdate(ctx_.get(), text.data(), text.size());
        return *this;
    }

    std::array<std::uint8_t, 32> finish()
    {
        std::array<std::uint8_t, 32> out{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), out.data(), &len);
        return out;
    }

    std::string finish_hex()
    {
        const auto d = finish();
        return to_hex(d);
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline std::string sha256_hex(std::string_view text) { return Sha256{}.update(text).finish_hex(); }
inline std::string sha256_hex(std::span<const std::uint8_t> data) { return Sha256{}.update(data).finish_hex(); }

}  // namespace bytehue
