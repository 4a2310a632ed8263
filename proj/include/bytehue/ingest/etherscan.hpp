// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdlib>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bytehue/error.hpp"
#include "bytehue/hex.hpp"
#include "bytehue/http.hpp"
#include "bytehue/ingest/record.hpp"

namespace bytehue::ingest {

inline constexpr const char* kApiKeyEnv = "BYTEHUE_ETHERSCAN_KEY";

enum class EthNetwork { mainnet, sepolia, holesky };

inline EthNetwork parse_network(std::string_view s)
{
    if (s == "mainnet")
        return EthNetwork::mainnet;
    if (s == "sepolia")
        return EthNetwork::sepolia;
    if (s == "holesky")
        return EthNetwork::holesky;
    throw Error(ErrorCode::InvalidRequest, "unknown network '" + std::string(s) + "'");
}

inline std::string_view to_string(EthNetwork n)
{
    switch (n)
    {
    case EthNetwork::mainnet: return "mainnet";
    case EthNetwork::sepolia: return "sepolia";
    case EthNetwork::holesky: return "holesky";
    }
    return "mainnet";
}

inline std::string default_base_url(EthNetwork n)
{
    switch (n)
    {
    case EthNetwork::mainnet: return "https://api.etherscan.io";
    case EthNetwork::sepolia: return "https://api-sepolia.etherscan.io";
    case EthNetwork::holesky: return "https://api-holesky.etherscan.io";
    }
    return "https://api.etherscan.io";
}

inline int chain_id(EthNetwork n)
{
    switch (n)
    {
    case EthNetwork::mainnet: return 1;
    case EthNetwork::sepolia: return 11155111;
    case EthNetwork::holesky: return 17000;
    }
    return 1;
}

/// Spaces requests at least 1/rps apart. Thread-safe.
class RateLimiter
{
public:
    explicit RateLimiter(double requests_per_second)
      : interval_(requests_per_second > 0 ? std::chrono::duration<double>(1.0 / requests_per_second)
                                          : std::chrono::duration<double>(0))
    {}

    void acquire()
    {
        std::unique_lock lock(mu_);
        const auto now = std::chrono::steady_clock::now();
        if (next_ > now)
        {
            const auto wait = next_ - now;
            next_ += std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            return;
        }
        next_ = now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
    }

private:
    std::chrono::duration<double> interval_;
    std::chrono::steady_clock::time_point next_{};
    std::mutex mu_;
};

struct ClientOptions
{
    EthNetwork network = EthNetwork::mainnet;
    std::string base_url;  // empty: network default
    std::string api_key;   // empty: read BYTEHUE_ETHERSCAN_KEY
    double requests_per_second = 5.0;
    int max_retries = 5;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::seconds timeout{20};
    std::size_t max_code_size = kDefaultMaxCodeSize;
};

/// One entry of a verified-contract listing page.
struct VerifiedEntry
{
    Address address;
    std::string compiler_version;
    std::optional<Timestamp> verified_at;
    std::optional<std::string> bytecode_hex;
};

/// Client for the subset of the Etherscan API the pipeline uses:
///   module=proxy&action=eth_getCode     deployed runtime code
///   module=contract&action=listverified paginated verified-contract listing
/// Rate-limit responses (HTTP 429 or "Max rate limit reached") are retried
/// with exponential backoff.
class EtherscanClient
{
public:
    explicit EtherscanClient(ClientOptions opts = {}) : opts_(std::move(opts)), limiter_(opts_.requests_per_second)
    {
        if (opts_.api_key.empty())
            if (const char* env = std::getenv(kApiKeyEnv))
                opts_.api_key = env;
        if (opts_.base_url.empty())
            opts_.base_url = default_base_url(opts_.network);
    }

    const ClientOptions& options() const noexcept { return opts_; }

    Bytecode fetch_bytecode(const Address& address)
    {
        const auto body = get({{"module", "proxy"},
                               {"action", "eth_getCode"},
                               {"address", address.to_string()},
                               {"tag", "latest"}});
        const auto& result = body.at("result");
        if (!result.is_string())
            throw Error(ErrorCode::NetworkError, "eth_getCode returned a non-string result");
        const auto code = result.get<std::string>();
        if (code.empty() || code == "0x" || code == "0x0")
            throw Error(ErrorCode::NotFound, "no code at " + address.to_string());
        try
        {
            return parse_hex(code, opts_.max_code_size);
        }
        catch (const Error& e)
        {
            if (e.code() == ErrorCode::TooLarge)
                throw;
            throw Error(ErrorCode::NetworkError, std::string("malformed bytecode from upstream: ") + e.what());
        }
    }

    std::vector<VerifiedEntry> list_verified(std::size_t page, std::size_t page_size)
    {
        const auto body = get({{"module", "contract"},
                               {"action", "listverified"},
                               {"page", std::to_string(page)},
                               {"offset", std::to_string(page_size)}});
        std::vector<VerifiedEntry> out;
        const auto& result = body.at("result");
        if (!result.is_array())
            return out;  // "No records found"
        for (const auto& e : result)
        {
            try
            {
                VerifiedEntry v{Address::parse(e.at("address").get<std::string>()),
                                e.value("compiler_version", std::string{}), std::nullopt, std::nullopt};
                if (e.contains("verified_at") && e["verified_at"].is_string())
                    v.verified_at = parse_iso8601(e["verified_at"].get<std::string>());
                if (e.contains("bytecode") && e["bytecode"].is_string())
                    v.bytecode_hex = e["bytecode"].get<std::string>();
                out.push_back(std::move(v));
            }
            catch (const nlohmann::json::exception& ex)
            {
                throw Error(ErrorCode::NetworkError, std::string("malformed listing entry: ") + ex.what());
            }
        }
        return out;
    }

private:
    nlohmann::json get(httplib::Params params)
    {
        if (opts_.api_key.empty())
            throw Error(ErrorCode::AuthMissing, std::string("set ") + kApiKeyEnv + " to an Etherscan API key");
        params.emplace("apikey", opts_.api_key);
        params.emplace("chainid", std::to_string(chain_id(opts_.network)));

        auto backoff = opts_.initial_backoff;
        for (int attempt = 0;; ++attempt)
        {
            limiter_.acquire();
            httplib::Client cli(opts_.base_url);
            cli.set_connection_timeout(opts_.timeout);
            cli.set_read_timeout(opts_.timeout);
            cli.set_follow_location(true);
            const auto res = cli.Get("/api", params, httplib::Headers{});

            bool rate_limited = false;
            std::string failure;
            if (!res)
                failure = "request to " + opts_.base_url + " failed: " + httplib::to_string(res.error());
            else if (res->status == 429)
                rate_limited = true;
            else if (res->status != 200)
                failure = "upstream returned HTTP " + std::to_string(res->status);
            else
            {
                nlohmann::json body;
                try
                {
                    body = nlohmann::json::parse(res->body);
                }
                catch (const nlohmann::json::exception&)
                {
                    throw Error(ErrorCode::NetworkError, "upstream returned invalid JSON");
                }
                if (!body.is_object() || !body.contains("result"))
                    throw Error(ErrorCode::NetworkError, "upstream response has no result field");
                const auto status = body.value("status", std::string{"1"});
                const auto& result = body["result"];
                const auto text = result.is_string() ? result.get<std::string>() : std::string{};
                if (status == "0" && text.find("rate limit") != std::string::npos)
                    rate_limited = true;
                else if (status == "0" && text.find("API Key") != std::string::npos)
                    throw Error(ErrorCode::AuthMissing, "upstream rejected the API key: " + text);
                else if (body.contains("error"))
                    throw Error(ErrorCode::NetworkError, "upstream error: " + body["error"].dump());
                else
                    return body;
            }

            if (attempt >= opts_.max_retries)
            {
                if (rate_limited)
                    throw Error(ErrorCode::RateLimited, "still rate limited after " + std::to_string(attempt + 1) + " attempts");
                throw Error(ErrorCode::NetworkError, failure);
            }
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }

    ClientOptions opts_;
    RateLimiter limiter_;
};

/// Maps a compiler version ("v0.4.11", build suffix ignored) to the known
/// bug names affecting it. File form: {"v0.4.11": ["BugA", "BugB"], ...}.
class CompilerBugMap
{
public:
    CompilerBugMap() = default;
    explicit CompilerBugMap(std::map<std::string, std::vector<std::string>> m) : map_(std::move(m)) {}

    static CompilerBugMap from_json(const nlohmann::json& j)
    {
        try
        {
            return CompilerBugMap(j.get<std::map<std::string, std::vector<std::string>>>());
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(ErrorCode::InvalidConfig, std::string("compiler bug map: ") + e.what());
        }
    }

    std::vector<std::string> bugs_for(std::string version) const
    {
        if (const auto plus = version.find('+'); plus != std::string::npos)
            version.resize(plus);
        if (!version.empty() && version[0] != 'v')
            version.insert(version.begin(), 'v');
        const auto it = map_.find(version);
        return it == map_.end() ? std::vector<std::string>{} : it->second;
    }

private:
    std::map<std::string, std::vector<std::string>> map_;
};

/// Walks listing pages [first_page, last_page] and yields one record per
/// unique address, in listing order. Addresses without code are skipped.
class VerifiedCrawler
{
public:
    VerifiedCrawler(EtherscanClient& client, std::size_t first_page, std::size_t last_page, std::size_t page_size,
                    LabelVocabulary vocab = {}, CompilerBugMap bugs = {})
      : client_(client),
        page_(first_page),
        last_page_(last_page),
        page_size_(page_size),
        vocab_(std::move(vocab)),
        bugs_(std::move(bugs))
    {}

    std::optional<ContractRecord> next()
    {
        while (true)
        {
            while (pending_.empty())
            {
                if (done_ || page_ > last_page_)
                    return std::nullopt;
                auto entries = client_.list_verified(page_++, page_size_);
                if (entries.empty())
                    done_ = true;
                for (auto& e : entries)
                    pending_.push_back(std::move(e));
            }
            auto entry = std::move(pending_.front());
            pending_.pop_front();
            if (!seen_.insert(entry.address.to_string()).second)
                continue;

            ContractRecord rec;
            rec.address = entry.address;
            rec.source = RecordSource::etherscan;
            rec.observed_at = entry.verified_at.value_or(now_utc());
            try
            {
                rec.bytecode = entry.bytecode_hex ? parse_hex(*entry.bytecode_hex, client_.options().max_code_size)
                                                  : client_.fetch_bytecode(entry.address);
            }
            catch (const Error& e)
            {
                if (e.code() == ErrorCode::NotFound || e.code() == ErrorCode::Empty)
                    continue;
                throw;
            }
            return label_record(std::move(rec), bugs_.bugs_for(entry.compiler_version), vocab_);
        }
    }

    std::vector<ContractRecord> collect()
    {
        std::vector<ContractRecord> out;
        while (auto r = next())
            out.push_back(std::move(*r));
        return out;
    }

private:
    EtherscanClient& client_;
    std::size_t page_;
    std::size_t last_page_;
    std::size_t page_size_;
    LabelVocabulary vocab_;
    CompilerBugMap bugs_;
    std::deque<VerifiedEntry> pending_;
    std::set<std::string> seen_;
    bool done_ = false;
};

}  // namespace bytehue::ingest
