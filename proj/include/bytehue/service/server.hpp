// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <memory>
#include <string>
#include <utility>

#include <json.hpp>

#include "bytehue/error.hpp"
#include "bytehue/http.hpp"
#include "bytehue/service/scan.hpp"

namespace bytehue::service {

/// HTTP status for every error code.
constexpr int http_status(ErrorCode code) noexcept
{
    switch (code)
    {
    // malformed input
    case ErrorCode::Empty:
    case ErrorCode::OddLength:
    case ErrorCode::NonHexCharacter:
    case ErrorCode::InvalidRequest: return 400;
    // address has no code
    case ErrorCode::NotFound: return 404;
    // bytecode over the size limit
    case ErrorCode::TooLarge: return 422;
    // upstream fetch failures
    case ErrorCode::NetworkError:
    case ErrorCode::RateLimited:
    case ErrorCode::AuthMissing: return 503;
    // internal
    case ErrorCode::UnknownLabel:
    case ErrorCode::EmptyDataset:
    case ErrorCode::DegenerateSplit:
    case ErrorCode::IoError:
    case ErrorCode::SchemaVersionMismatch:
    case ErrorCode::CorruptRecord:
    case ErrorCode::InconsistentLength:
    case ErrorCode::UnsupportedPngVariant:
    case ErrorCode::InvalidConfig:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::ArityMismatch:
    case ErrorCode::StaleCache:
    case ErrorCode::TooLargeForOracle:
    case ErrorCode::InvalidEpsilon:
    case ErrorCode::EmptyTrainSet:
    case ErrorCode::DivergenceDetected:
    case ErrorCode::FreezeIndexInvalid:
    case ErrorCode::HeadArityMismatch:
    case ErrorCode::EmptySplit:
    case ErrorCode::ModelIncompatible:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::MagicMismatch:
    case ErrorCode::BindFailure: return 500;
    }
    return 500;
}

inline nlohmann::json error_json(const Error& e)
{
    nlohmann::json j = {{"code", to_string(e.code())}, {"message", e.what()}};
    if (e.position() >= 0)
        j["position"] = e.position();
    return {{"error", std::move(j)}};
}

/// Splits "host:port". A bare port binds to 127.0.0.1.
inline std::pair<std::string, int> parse_bind(const std::string& bind)
{
    const auto colon = bind.rfind(':');
    const std::string host = colon == std::string::npos ? "127.0.0.1" : bind.substr(0, colon);
    const std::string port_text = colon == std::string::npos ? bind : bind.substr(colon + 1);
    int port = -1;
    const auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || end != port_text.data() + port_text.size() || port < 0 || port > 65535 || host.empty())
        throw Error(ErrorCode::InvalidConfig, "bind address must look like host:port, got '" + bind + "'");
    return {host, port};
}

/// REST front end over a shared, immutable Scanner.
///   POST /api/v1/scan    {"bytecode": "0x.."} or {"address": "0x..", "network": "mainnet"}
///   GET  /api/v1/health
///   GET  /api/v1/model
class Server
{
public:
    explicit Server(std::shared_ptr<const Scanner> scanner) : scanner_(std::move(scanner))
    {
        // SO_REUSEADDR only: a second instance on a busy port must fail to bind
        http_.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        });
        routes();
    }

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port)
    {
        const int bound = port == 0 ? http_.bind_to_any_port(host) : (http_.bind_to_port(host, port) ? port : -1);
        if (bound < 0)
            throw Error(ErrorCode::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
        return bound;
    }

    /// Serves until stop(). Call bind() first.
    void run() { http_.listen_after_bind(); }

    void listen(const std::string& bind_address)
    {
        const auto [host, port] = parse_bind(bind_address);
        bind(host, port);
        run();
    }

    void stop() { http_.stop(); }
    void wait_until_ready() const { http_.wait_until_ready(); }

private:
    static void send_json(httplib::Response& res, int status, const nlohmann::json& j)
    {
        res.status = status;
        res.set_content(j.dump(), "application/json");
    }

    void routes()
    {
        http_.Post("/api/v1/scan", [this](const httplib::Request& req, httplib::Response& res) {
            try
            {
                nlohmann::json body;
                try
                {
                    body = nlohmann::json::parse(req.body);
                }
                catch (const nlohmann::json::exception&)
                {
                    throw Error(ErrorCode::InvalidRequest, "request body is not valid JSON");
                }
                send_json(res, 200, scanner_->scan(ScanRequest::from_json(body)).to_json());
            }
            catch (const Error& e)
            {
                send_json(res, http_status(e.code()), error_json(e));
            }
        });
        http_.Get("/api/v1/health", [this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}, {"model_version", scanner_->bundle().model_version()}});
        });
        http_.Get("/api/v1/model", [this](const httplib::Request&, httplib::Response& res) {
            const auto& b = scanner_->bundle();
            send_json(res, 200,
                      {{"model_version", b.model_version()},
                       {"name", b.name},
                       {"created_at", ingest::format_iso8601(b.created_at)},
                       {"vocabulary", {{"version", b.vocabulary.version()}, {"names", b.vocabulary.names()}}},
                       {"encoding", to_json(b.encoding)},
                       {"encoding_hash", encoding_hash(b.encoding)},
                       {"multilabel", b.multilabel.has_value()},
                       {"threshold", scanner_->threshold()}});
        });
        http_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
            send_json(res, 500, {{"error", {{"code", "Internal"}, {"message", "internal error"}}}});
        });
    }

    std::shared_ptr<const Scanner> scanner_;
    httplib::Server http_;
};

}  // namespace bytehue::service
