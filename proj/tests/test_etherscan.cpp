// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <functional>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "bytehue/http.hpp"
#include "bytehue/ingest/etherscan.hpp"

using namespace bytehue;
using namespace bytehue::ingest;

namespace {

// Serves GET /api through `handler` on a loopback port.
class MockApi
{
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit MockApi(Handler handler)
    {
        server_.Get("/api", [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            handler(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockApi()
    {
        server_.stop();
        thread_.join();
    }

    ClientOptions options() const
    {
        ClientOptions o;
        o.base_url = "http://127.0.0.1:" + std::to_string(port_);
        o.api_key = "test-key";
        o.requests_per_second = 1000;
        o.initial_backoff = std::chrono::milliseconds{1};
        o.max_retries = 3;
        o.timeout = std::chrono::seconds{5};
        return o;
    }

    std::atomic<int> hits{0};

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

void reply(httplib::Response& res, const nlohmann::json& j) { res.set_content(j.dump(), "application/json"); }

std::string address(int i)
{
    char buf[43];
    std::snprintf(buf, sizeof buf, "0x%040x", i);
    return buf;
}

nlohmann::json listing(int first, int count)
{
    auto arr = nlohmann::json::array();
    for (int i = first; i < first + count; ++i)
        arr.push_back({{"address", address(i)},
                       {"compiler_version", "v0.4.11+commit.68ef5810"},
                       {"verified_at", "2018-05-0" + std::to_string(1 + i % 9) + "T00:00:00Z"},
                       {"bytecode", "0x6060604052"}});
    return {{"status", "1"}, {"message", "OK"}, {"result", arr}};
}

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

}  // namespace

TEST(Etherscan, FetchBytecode)
{
    MockApi api([](const httplib::Request& req, httplib::Response& res) {
        EXPECT_EQ(req.get_param_value("module"), "proxy");
        EXPECT_EQ(req.get_param_value("action"), "eth_getCode");
        EXPECT_EQ(req.get_param_value("apikey"), "test-key");
        EXPECT_EQ(req.get_param_value("address"), "0xbb9bc244d798123fde783fcc1c72d3bb8c189413");
        reply(res, {{"jsonrpc", "2.0"}, {"id", 1}, {"result", "0x606060405236156100"}});
    });
    EtherscanClient client(api.options());
    const auto code = client.fetch_bytecode(Address::parse("0xBB9bc244D798123fDe783fCc1C72d3Bb8C189413"));
    EXPECT_EQ(code.bytes(), (Bytes{0x60, 0x60, 0x60, 0x40, 0x52, 0x36, 0x15, 0x61, 0x00}));
}

TEST(Etherscan, ZeroAddressIsNotFound)
{
    MockApi api([](const httplib::Request&, httplib::Response& res) { reply(res, {{"result", "0x"}}); });
    EtherscanClient client(api.options());
    EXPECT_EQ(code_of([&] { client.fetch_bytecode(Address{}); }), ErrorCode::NotFound);
}

TEST(Etherscan, MissingCredential)
{
    MockApi api([](const httplib::Request&, httplib::Response& res) { reply(res, {{"result", "0x60"}}); });
    ::unsetenv(kApiKeyEnv);
    auto opts = api.options();
    opts.api_key.clear();
    EtherscanClient client(opts);
    EXPECT_EQ(code_of([&] { client.fetch_bytecode(Address{}); }), ErrorCode::AuthMissing);
    EXPECT_EQ(api.hits.load(), 0);
}

TEST(Etherscan, RejectedKeyIsAuthMissing)
{
    MockApi api([](const httplib::Request&, httplib::Response& res) {
        reply(res, {{"status", "0"}, {"message", "NOTOK"}, {"result", "Invalid API Key"}});
    });
    EtherscanClient client(api.options());
    EXPECT_EQ(code_of([&] { client.fetch_bytecode(Address{}); }), ErrorCode::AuthMissing);
}

TEST(Etherscan, RetriesThroughRateLimit)
{
    std::atomic<int> calls{0};
    MockApi api([&](const httplib::Request&, httplib::Response& res) {
        if (calls++ < 2)
        {
            res.status = 429;
            return;
        }
        reply(res, {{"result", "0x6080"}});
    });
    EtherscanClient client(api.options());
    EXPECT_EQ(client.fetch_bytecode(Address{}).bytes(), (Bytes{0x60, 0x80}));
    EXPECT_EQ(calls.load(), 3);
}

TEST(Etherscan, RateLimitedAfterRetries)
{
    MockApi api([](const httplib::Request&, httplib::Response& res) {
        reply(res, {{"status", "0"}, {"message", "NOTOK"}, {"result", "Max rate limit reached"}});
    });
    EtherscanClient client(api.options());
    EXPECT_EQ(code_of([&] { client.fetch_bytecode(Address{}); }), ErrorCode::RateLimited);
    EXPECT_EQ(api.hits.load(), 4);
}

TEST(Etherscan, ServerErrorIsNetworkError)
{
    MockApi api([](const httplib::Request&, httplib::Response& res) { res.status = 502; });
    EtherscanClient client(api.options());
    EXPECT_EQ(code_of([&] { client.fetch_bytecode(Address{}); }), ErrorCode::NetworkError);

    auto opts = api.options();
    opts.base_url = "http://127.0.0.1:1";
    opts.max_retries = 0;
    EtherscanClient dead(opts);
    EXPECT_EQ(code_of([&] { dead.fetch_bytecode(Address{}); }), ErrorCode::NetworkError);
}

TEST(Etherscan, RateLimiterSpacesRequests)
{
    RateLimiter limiter(50.0);
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 6; ++i)
        limiter.acquire();
    EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds{95});
}

TEST(Crawler, OnePageOfTen)
{
    MockApi api([](const httplib::Request& req, httplib::Response& res) {
        EXPECT_EQ(req.get_param_value("action"), "listverified");
        reply(res, req.get_param_value("page") == "1" ? listing(0, 10) : listing(0, 0));
    });
    EtherscanClient client(api.options());
    const LabelVocabulary vocab;
    const CompilerBugMap bugs(std::map<std::string, std::vector<std::string>>{{"v0.4.11", {"AncientCompiler"}}});
    const auto records = VerifiedCrawler(client, 1, 1, 10, vocab, bugs).collect();
    ASSERT_LE(records.size(), 10u);
    EXPECT_EQ(records.size(), 10u);
    std::set<std::string> seen;
    for (const auto& r : records)
    {
        EXPECT_EQ(r.source, RecordSource::etherscan);
        EXPECT_TRUE(seen.insert(r.address->to_string()).second);
        EXPECT_EQ(r.labels, (LabelVector{0, 0, 1, 0, 0, 0, 0}));
        EXPECT_EQ(format_iso8601(r.observed_at).substr(0, 8), "2018-05-");
    }
}

TEST(Crawler, EmptyPageEndsStream)
{
    MockApi api([](const httplib::Request&, httplib::Response& res) {
        reply(res, {{"status", "0"}, {"message", "No records found"}, {"result", "[]"}});
    });
    EtherscanClient client(api.options());
    EXPECT_TRUE(VerifiedCrawler(client, 1, 5, 10).collect().empty());
    EXPECT_EQ(api.hits.load(), 1);
}

TEST(Crawler, DeduplicatesAcrossPages)
{
    MockApi api([](const httplib::Request& req, httplib::Response& res) {
        // pages overlap by five addresses
        const int page = std::stoi(req.get_param_value("page"));
        reply(res, listing((page - 1) * 5, 10));
    });
    EtherscanClient client(api.options());
    const auto records = VerifiedCrawler(client, 1, 3, 10).collect();
    EXPECT_EQ(records.size(), 20u);
    std::set<std::string> seen;
    for (const auto& r : records)
        EXPECT_TRUE(seen.insert(r.address->to_string()).second);
}

TEST(Crawler, FetchesCodeWhenListingOmitsItAndSkipsEmpty)
{
    MockApi api([](const httplib::Request& req, httplib::Response& res) {
        if (req.get_param_value("action") == "listverified")
        {
            auto j = listing(1, 2);
            for (auto& e : j["result"])
                e.erase("bytecode");
            reply(res, req.get_param_value("page") == "1" ? j : listing(0, 0));
            return;
        }
        reply(res, {{"result", req.get_param_value("address") == address(1) ? "0x" : "0x6001"}});
    });
    EtherscanClient client(api.options());
    const auto records = VerifiedCrawler(client, 1, 2, 2).collect();
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].address->to_string(), address(2));
    EXPECT_EQ(records[0].bytecode.bytes(), (Bytes{0x60, 0x01}));
}

TEST(CompilerBugs, VersionNormalisation)
{
    const auto m = CompilerBugMap::from_json(nlohmann::json::parse(R"({"v0.4.11": ["A", "B"]})"));
    EXPECT_EQ(m.bugs_for("v0.4.11+commit.68ef5810"), (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(m.bugs_for("0.4.11"), (std::vector<std::string>{"A", "B"}));
    EXPECT_TRUE(m.bugs_for("v0.5.0").empty());
    EXPECT_THROW(CompilerBugMap::from_json(nlohmann::json::parse("[1]")), Error);
}
