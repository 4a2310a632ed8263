// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bytehue/cnn/config.hpp"
#include "bytehue/cnn/network.hpp"
#include "bytehue/digest.hpp"
#include "bytehue/encoder.hpp"
#include "bytehue/error.hpp"
#include "bytehue/ingest/record.hpp"
#include "bytehue/train/infer.hpp"

namespace bytehue::service {

inline constexpr std::string_view kBundleMagic = "BYTEHUE1";
inline constexpr int kBundleFormat = 1;

/// Everything needed to scan: the gate model, the optional multilabel
/// model, the label vocabulary and the encoding both were trained under.
struct ModelBundle
{
    std::string name = "bytehue-micro";
    train::Model binary;
    std::optional<train::Model> multilabel;
    ingest::LabelVocabulary vocabulary;
    EncodingConfig encoding;
    ingest::Timestamp created_at{};
    std::string content_checksum;  // filled by save/load

    std::string model_version() const
    {
        return content_checksum.empty() ? name : name + "@" + content_checksum.substr(0, 12);
    }

    void validate() const
    {
        const auto enc = encoding_hash(encoding);
        if (binary.encoding_hash != enc || (multilabel && multilabel->encoding_hash != enc))
            throw Error(ErrorCode::ModelIncompatible, "model encoding hash does not match the bundle encoding");
        cnn::Network(binary.net).check_params(binary.params);
        if (binary.net.head.kind != cnn::HeadKind::softmax || binary.net.head.arity != 2)
            throw Error(ErrorCode::HeadArityMismatch, "binary model needs a softmax(2) head");
        if (multilabel)
        {
            cnn::Network(multilabel->net).check_params(multilabel->params);
            train::check_compatible(binary, *multilabel);
            if (multilabel->net.head.arity != vocabulary.size())
                throw Error(ErrorCode::HeadArityMismatch, "multilabel head arity differs from the vocabulary size");
        }
    }
};

namespace detail {

inline void append_f64(std::string& out, double v)
{
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i, bits >>= 8)
        out.push_back(static_cast<char>(bits & 0xff));
}

inline double read_f64(const char* p)
{
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i)
        bits = (bits << 8) | static_cast<unsigned char>(p[i]);
    return std::bit_cast<double>(bits);
}

inline void append_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i, v >>= 8)
        out.push_back(static_cast<char>(v & 0xff));
}

inline std::uint64_t read_u64(const char* p)
{
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}

inline nlohmann::json model_meta(const train::Model& m, std::string& blobs)
{
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& [idx, p] : m.params)
        for (const auto* t : {&p.weight, &p.bias})
        {
            tensors.push_back({{"layer", idx}, {"role", t == &p.weight ? "weight" : "bias"}, {"shape", t->shape()}});
            for (const auto v : t->values())
                append_f64(blobs, v);
        }
    return {{"net", cnn::to_json(m.net)}, {"encoding_hash", m.encoding_hash}, {"tensors", std::move(tensors)}};
}

inline train::Model model_from_meta(const nlohmann::json& j, std::string_view blobs, std::size_t& offset)
{
    train::Model m;
    m.net = cnn::network_from_json(j.at("net"));
    m.encoding_hash = j.at("encoding_hash").get<std::string>();
    for (const auto& t : j.at("tensors"))
    {
        const auto shape = t.at("shape").get<cnn::Shape>();
        const auto n = cnn::shape_size(shape);
        if (n > (blobs.size() - offset) / 8)
            throw Error(ErrorCode::ShapeMismatch, "weight blobs are shorter than the metadata shapes");
        std::vector<double> data(n);
        for (std::size_t k = 0; k < n; ++k, offset += 8)
            data[k] = read_f64(blobs.data() + offset);
        auto& lp = m.params[t.at("layer").get<std::size_t>()];
        (t.at("role").get<std::string>() == "weight" ? lp.weight : lp.bias) = cnn::Tensor(shape, std::move(data));
    }
    cnn::Network(m.net).check_params(m.params);
    return m;
}

inline nlohmann::json bundle_meta(const ModelBundle& b, std::string& blobs)
{
    nlohmann::json j = {
        {"format", kBundleFormat},
        {"name", b.name},
        {"created_at", ingest::format_iso8601(b.created_at)},
        {"vocabulary", {{"version", b.vocabulary.version()}, {"names", b.vocabulary.names()}}},
        {"encoding", to_json(b.encoding)},
        {"binary", model_meta(b.binary, blobs)},
    };
    if (b.multilabel)
        j["multilabel"] = model_meta(*b.multilabel, blobs);
    return j;
}

inline std::string content_checksum(const std::string& meta_dump, const std::string& blobs)
{
    Sha256 h;
    h.update(std::string_view(meta_dump));
    h.update(std::string_view(blobs));
    return h.finish_hex();
}

}  // namespace detail

/// Serialises `b`: the magic, a u64 little-endian metadata length, the JSON
/// metadata (with the SHA-256 checksum), then little-endian f64 weights in
/// metadata order.
inline std::string bundle_to_bytes(ModelBundle& b)
{
    b.validate();
    std::string blobs;
    auto meta = detail::bundle_meta(b, blobs);
    b.content_checksum = detail::content_checksum(meta.dump(), blobs);
    meta["checksum"] = b.content_checksum;
    const auto meta_dump = meta.dump();

    std::string out(kBundleMagic);
    detail::append_u64(out, meta_dump.size());
    out += meta_dump;
    out += blobs;
    return out;
}

inline void save_bundle(ModelBundle& b, const std::filesystem::path& path)
{
    const auto bytes = bundle_to_bytes(b);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write bundle '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

inline ModelBundle bundle_from_bytes(std::string_view bytes)
{
    if (bytes.size() < kBundleMagic.size() || bytes.substr(0, kBundleMagic.size()) != kBundleMagic)
        throw Error(ErrorCode::MagicMismatch, "not a bytehue bundle");
    std::size_t pos = kBundleMagic.size();
    if (bytes.size() - pos < 8)
        throw Error(ErrorCode::IoError, "bundle truncated in the header");
    const auto meta_len = detail::read_u64(bytes.data() + pos);
    pos += 8;
    if (meta_len > bytes.size() - pos)
        throw Error(ErrorCode::IoError, "bundle truncated in the metadata");
    const std::string meta_dump(bytes.substr(pos, meta_len));
    const auto blobs = bytes.substr(pos + meta_len);

    nlohmann::json meta;
    try
    {
        meta = nlohmann::json::parse(meta_dump);
    }
    catch (const nlohmann::json::exception&)
    {
        throw Error(ErrorCode::ChecksumMismatch, "bundle metadata is corrupt");
    }
    // the metadata must be byte-for-byte canonical so that no edit escapes
    // the checksum
    if (!meta.is_object() || !meta.contains("checksum") || !meta["checksum"].is_string() || meta.dump() != meta_dump)
        throw Error(ErrorCode::ChecksumMismatch, "bundle metadata is corrupt");
    std::size_t expected = 0;
    try
    {
        for (const char* m : {"binary", "multilabel"})
            if (meta.contains(m))
                for (const auto& t : meta[m].at("tensors"))
                    expected += 8 * cnn::shape_size(t.at("shape").get<cnn::Shape>());
    }
    catch (const nlohmann::json::exception&)
    {
        throw Error(ErrorCode::ChecksumMismatch, "bundle metadata is corrupt");
    }
    if (blobs.size() < expected)
        throw Error(ErrorCode::IoError, "bundle truncated in the weights");
    const auto stored = meta["checksum"].get<std::string>();
    meta.erase("checksum");
    if (detail::content_checksum(meta.dump(), std::string(blobs)) != stored)
        throw Error(ErrorCode::ChecksumMismatch, "bundle checksum does not match its contents");

    try
    {
        if (meta.at("format").get<int>() != kBundleFormat)
            throw Error(ErrorCode::SchemaVersionMismatch, "unsupported bundle format");
        ModelBundle b;
        b.name = meta.at("name").get<std::string>();
        b.created_at = ingest::parse_iso8601(meta.at("created_at").get<std::string>());
        b.vocabulary = {meta.at("vocabulary").at("names").get<std::vector<std::string>>(),
                        meta.at("vocabulary").at("version").get<std::string>()};
        b.encoding = encoding_from_json(meta.at("encoding"));
        std::size_t offset = 0;
        b.binary = detail::model_from_meta(meta.at("binary"), blobs, offset);
        if (meta.contains("multilabel"))
            b.multilabel = detail::model_from_meta(meta.at("multilabel"), blobs, offset);
        if (offset != blobs.size())
            throw Error(ErrorCode::ShapeMismatch, "weight blobs are longer than the metadata shapes");
        b.content_checksum = stored;
        b.validate();
        return b;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorCode::ShapeMismatch, std::string("bundle metadata is malformed: ") + e.what());
    }
}

inline ModelBundle load_bundle(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open bundle '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bundle_from_bytes(bytes);
}

}  // namespace bytehue::service
