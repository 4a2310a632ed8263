// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bytehue/digest.hpp"
#include "bytehue/encoder.hpp"
#include "bytehue/error.hpp"
#include "bytehue/hex.hpp"
#include "bytehue/ingest/etherscan.hpp"
#include "bytehue/ingest/record.hpp"
#include "bytehue/service/bundle.hpp"
#include "bytehue/train/infer.hpp"

namespace bytehue::service {

/// Exactly one of `bytecode` (hex) or `address` must be set.
struct ScanRequest
{
    std::optional<std::string> bytecode;
    std::optional<std::string> address;
    ingest::EthNetwork network = ingest::EthNetwork::mainnet;

    void validate() const
    {
        if (bytecode.has_value() == address.has_value())
            throw Error(ErrorCode::InvalidRequest, "give exactly one of 'bytecode' or 'address'");
    }

    static ScanRequest from_json(const nlohmann::json& j)
    {
        if (!j.is_object())
            throw Error(ErrorCode::InvalidRequest, "request body must be a JSON object");
        ScanRequest r;
        for (const auto& [key, value] : j.items())
        {
            if (key != "bytecode" && key != "address" && key != "network")
                throw Error(ErrorCode::InvalidRequest, "unknown field '" + key + "'");
            if (!value.is_string())
                throw Error(ErrorCode::InvalidRequest, "field '" + key + "' must be a string");
        }
        if (j.contains("bytecode"))
            r.bytecode = j["bytecode"].get<std::string>();
        if (j.contains("address"))
            r.address = j["address"].get<std::string>();
        if (j.contains("network"))
        {
            if (!r.address)
                throw Error(ErrorCode::InvalidRequest, "'network' only applies to address scans");
            r.network = ingest::parse_network(j["network"].get<std::string>());
        }
        r.validate();
        return r;
    }
};

struct LabelResult
{
    std::string name;
    double confidence = 0;
    bool flagged = false;
    friend bool operator==(const LabelResult&, const LabelResult&) = default;
};

struct ScanReport
{
    std::string input_digest;  // SHA-256 of the normalized bytecode
    std::size_t code_size = 0;
    double is_buggy = 0;
    bool stage2 = false;
    double threshold = 0.5;
    std::vector<LabelResult> labels;  // vocabulary order
    std::string model_version;
    std::string encoding_hash;
    double elapsed_ms = 0;

    /// Equality ignoring the timing field.
    bool same_result(const ScanReport& o) const
    {
        return input_digest == o.input_digest && code_size == o.code_size && is_buggy == o.is_buggy &&
               stage2 == o.stage2 && threshold == o.threshold && labels == o.labels &&
               model_version == o.model_version && encoding_hash == o.encoding_hash;
    }

    nlohmann::json to_json() const
    {
        nlohmann::json ls = nlohmann::json::array();
        for (const auto& l : labels)
            ls.push_back({{"name", l.name}, {"confidence", l.confidence}, {"flagged", l.flagged}});
        return {{"input_digest", input_digest}, {"code_size", code_size},     {"is_buggy", is_buggy},
                {"stage2", stage2},             {"threshold", threshold},     {"labels", std::move(ls)},
                {"model_version", model_version}, {"encoding_hash", encoding_hash}, {"elapsed_ms", elapsed_ms}};
    }
};

using BytecodeFetcher = std::function<Bytecode(const ingest::Address&, ingest::EthNetwork)>;

/// Fetches through Etherscan with the key from the environment.
inline BytecodeFetcher etherscan_fetcher(ingest::ClientOptions base = {})
{
    return [base](const ingest::Address& a, ingest::EthNetwork n) {
        auto opts = base;
        opts.network = n;
        return ingest::EtherscanClient(opts).fetch_bytecode(a);
    };
}

struct ScannerOptions
{
    double threshold = 0.5;
    std::size_t cache_entries = 0;  // 0 disables the response cache
    BytecodeFetcher fetcher;        // empty: etherscan_fetcher()
};

/// Immutable model plus an optional bounded LRU of reports keyed by input
/// digest. Safe to call from several threads.
class Scanner
{
public:
    explicit Scanner(ModelBundle bundle, ScannerOptions opts = {})
      : bundle_(std::move(bundle)), opts_(std::move(opts)), enc_hash_(encoding_hash(bundle_.encoding))
    {
        bundle_.validate();
        if (!(opts_.threshold >= 0 && opts_.threshold <= 1))
            throw Error(ErrorCode::InvalidConfig, "threshold must be in [0, 1]");
        if (!opts_.fetcher)
            opts_.fetcher = etherscan_fetcher();
    }

    const ModelBundle& bundle() const noexcept { return bundle_; }
    double threshold() const noexcept { return opts_.threshold; }

    ScanReport scan(const ScanRequest& request) const
    {
        const auto t0 = std::chrono::steady_clock::now();
        request.validate();
        const auto code = request.bytecode ? parse_hex(*request.bytecode)
                                           : opts_.fetcher(ingest::Address::parse(*request.address), request.network);
        auto report = scan_code(code);
        report.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return report;
    }

    ScanReport scan_code(const Bytecode& code) const
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto digest = sha256_hex(code.view());
        if (auto hit = cache_get(digest))
        {
            hit->elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            return *hit;
        }

        ScanReport r;
        r.input_digest = digest;
        r.code_size = code.size();
        r.threshold = opts_.threshold;
        r.model_version = bundle_.model_version();
        r.encoding_hash = enc_hash_;

        const auto input = image_to_tensor(encode(code, bundle_.encoding));
        if (bundle_.multilabel)
        {
            const auto inf = train::two_stage_infer(bundle_.binary, *bundle_.multilabel, input, opts_.threshold);
            r.is_buggy = inf.is_buggy;
            r.stage2 = inf.stage2_ran;
            for (std::size_t j = 0; j < bundle_.vocabulary.size(); ++j)
                r.labels.push_back({bundle_.vocabulary.names()[j], inf.confidences[j], inf.labels[j] != 0});
        }
        else
        {
            r.is_buggy = cnn::Network(bundle_.binary.net).forward(bundle_.binary.params, input).output[1];
        }
        cache_put(digest, r);
        r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }

private:
    std::optional<ScanReport> cache_get(const std::string& key) const
    {
        if (opts_.cache_entries == 0)
            return std::nullopt;
        std::lock_guard lock(mu_);
        const auto it = index_.find(key);
        if (it == index_.end())
            return std::nullopt;
        lru_.splice(lru_.begin(), lru_, it->second);
        return it->second->second;
    }

    void cache_put(const std::string& key, const ScanReport& r) const
    {
        if (opts_.cache_entries == 0)
            return;
        std::lock_guard lock(mu_);
        if (index_.contains(key))
            return;
        lru_.emplace_front(key, r);
        index_[key] = lru_.begin();
        if (lru_.size() > opts_.cache_entries)
        {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
    }

    ModelBundle bundle_;
    ScannerOptions opts_;
    std::string enc_hash_;
    mutable std::mutex mu_;
    mutable std::list<std::pair<std::string, ScanReport>> lru_;
    mutable std::unordered_map<std::string, std::list<std::pair<std::string, ScanReport>>::iterator> index_;
};

inline ScanReport scan(const ModelBundle& bundle, const ScanRequest& request, ScannerOptions opts = {})
{
    return Scanner(bundle, std::move(opts)).scan(request);
}

}  // namespace bytehue::service
