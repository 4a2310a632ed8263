// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bytehue/cnn/config.hpp"
#include "bytehue/encoder.hpp"
#include "bytehue/error.hpp"
#include "bytehue/hex.hpp"
#include "bytehue/ingest/dataset.hpp"
#include "bytehue/ingest/etherscan.hpp"
#include "bytehue/ingest/synthetic.hpp"
#include "bytehue/png_io.hpp"
#include "bytehue/service/bundle.hpp"
#include "bytehue/service/scan.hpp"
#include "bytehue/service/server.hpp"
#include "bytehue/train/infer.hpp"
#include "bytehue/train/trainer.hpp"

namespace bytehue {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

namespace cli_detail {

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline nlohmann::json read_json(const std::string& path)
{
    try
    {
        return nlohmann::json::parse(read_file(path));
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorCode::InvalidConfig, "'" + path + "': " + e.what());
    }
}

struct EncodingFlags
{
    int pad_byte = 0;
    std::size_t width = 0;
    bool square = false;
    std::string target = "224x224";
    std::string filter = "nearest";

    void add_to(CLI::App& app)
    {
        app.add_option("--pad-byte", pad_byte, "Tail padding byte")->check(CLI::Range(0, 255));
        auto* w = app.add_option("--width", width, "Fixed row width in pixels")->check(CLI::PositiveNumber);
        app.add_flag("--square", square, "Square layout (default)")->excludes(w);
        app.add_option("--target", target, "Network input size, HxW or N");
        app.add_option("--filter", filter, "Resize filter")->check(CLI::IsMember({"nearest", "bilinear"}));
    }

    EncodingConfig config() const
    {
        EncodingConfig c;
        c.pad_byte = static_cast<std::uint8_t>(pad_byte);
        c.layout = width > 0 ? Layout::fixed_width : Layout::square;
        c.fixed_width = width;
        const auto x = target.find('x');
        try
        {
            std::size_t used = 0;
            c.target_height = std::stoul(target.substr(0, x), &used);
            if (used != target.substr(0, x).size())
                throw std::invalid_argument("trailing characters");
            c.target_width = x == std::string::npos ? c.target_height : std::stoul(target.substr(x + 1), &used);
            if (x != std::string::npos && used != target.size() - x - 1)
                throw std::invalid_argument("trailing characters");
        }
        catch (const std::logic_error&)
        {
            throw Error(ErrorCode::InvalidConfig, "--target must look like 224x224, got '" + target + "'");
        }
        c.resize_filter = filter == "nearest" ? ResizeFilter::nearest : ResizeFilter::bilinear;
        c.validate();
        return c;
    }
};

inline void print_metrics(std::ostream& out, const std::string& title, const train::Metrics& m)
{
    out << title << " (" << m.samples << " samples)\n";
    if (m.multilabel)
        out << "  label accuracy (micro) " << m.accuracy << "\n  subset accuracy        " << m.subset_accuracy
            << "\n  precision (micro)      " << m.micro_precision << "\n  recall (micro)         " << m.micro_recall
            << '\n';
    else
        out << "  accuracy  " << m.accuracy << "\n  precision " << m.precision << "\n  recall    " << m.recall << '\n';
    out << "  loss      " << m.loss << '\n';
}

inline void print_report(std::ostream& out, const service::ScanReport& r)
{
    out << "digest     " << r.input_digest << "\nsize       " << r.code_size << " bytes\nis_buggy   " << r.is_buggy
        << "\nmodel      " << r.model_version << '\n';
    if (!r.stage2)
        out << "labels     (stage 2 skipped)\n";
    for (const auto& l : r.labels)
        out << (l.flagged ? "  [x] " : "  [ ] ") << l.name << "  " << l.confidence << '\n';
    out << "elapsed    " << r.elapsed_ms << " ms\n";
}

}  // namespace cli_detail

/// Entry point of the `bytehue` tool. Returns 0 on success, 1 on an
/// operational error, 2 on a usage error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"bytehue: scan EVM bytecode for compiler-bug patterns with a color-image CNN", "bytehue"};
    app.require_subcommand(1);
    bool json = false;
    app.add_flag("--json", json, "Machine-readable output");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Build a dataset file");
    std::string ds_out, vocab_path, bugs_path, network = "mainnet", split_mode = "random", val_start, test_start;
    std::size_t synthetic = 0, planted = 4, first_page = 1, last_page = 1, page_size = 100;
    std::uint64_t seed = 0;
    bool synthetic_binary = false, from_etherscan = false;
    std::vector<std::string> hex_files, file_labels;
    std::vector<double> ratios{0.8, 0.1, 0.1};
    ingest->add_option("--out", ds_out, "Dataset file to write")->required();
    ingest->add_option("--vocab", vocab_path, "Label vocabulary file");
    auto* src = ingest->add_option_group("source")->require_option(1);
    src->add_option("--synthetic", synthetic, "Generate N planted-motif contracts");
    src->add_flag("--etherscan", from_etherscan, "Crawl verified contracts");
    src->add_option("--hex-file", hex_files, "Hex bytecode files, one contract each");
    ingest->add_option("--planted", planted, "Labels carrying motifs (synthetic)");
    ingest->add_flag("--binary", synthetic_binary, "Half clean, half one-motif (synthetic)");
    ingest->add_option("--label", file_labels, "Labels for every --hex-file contract");
    ingest->add_option("--network", network, "Ethereum network")->check(CLI::IsMember({"mainnet", "sepolia", "holesky"}));
    ingest->add_option("--pages", first_page, "First listing page");
    ingest->add_option("--last-page", last_page, "Last listing page");
    ingest->add_option("--page-size", page_size, "Listing page size");
    ingest->add_option("--bugs", bugs_path, "Compiler-version to bug-name map (JSON)");
    ingest->add_option("--split", split_mode, "Split mode (none puts every record in train)")->check(CLI::IsMember({"random", "temporal", "none"}));
    ingest->add_option("--ratios", ratios, "Train,val,test ratios")->delimiter(',')->expected(3);
    ingest->add_option("--val-start", val_start, "Temporal split: first validation timestamp");
    ingest->add_option("--test-start", test_start, "Temporal split: first test timestamp");
    ingest->add_option("--seed", seed, "Seed for generation and splitting");

    // encode
    auto* enc = app.add_subcommand("encode", "Render bytecode as a color PNG");
    std::string enc_hex, enc_file, png_out;
    bool raw = false;
    cli_detail::EncodingFlags enc_flags;
    auto* enc_src = enc->add_option_group("input")->require_option(1);
    enc_src->add_option("--hex", enc_hex, "Hex bytecode");
    enc_src->add_option("--in,--hex-file", enc_file, "File holding hex bytecode");
    enc->add_option("--out", png_out, "PNG file to write");
    enc->add_flag("--raw", raw, "Write the unresized image");
    enc_flags.add_to(*enc);

    // train
    auto* tr = app.add_subcommand("train", "Train the binary gate or the multilabel head");
    std::string dataset, net_path, stage = "binary", from_bundle, bundle_out, log_csv, weighting = "none";
    bool freeze_features = false;
    train::TrainConfig tcfg;
    double stop_at = -1;
    cli_detail::EncodingFlags tr_flags;
    tr->add_option("--dataset", dataset, "Dataset file")->required();
    tr->add_option("--net", net_path, "Network config JSON (default: bytehue-micro)");
    tr->add_option("--stage", stage, "Training stage")->check(CLI::IsMember({"binary", "multilabel"}));
    tr->add_option("--from", from_bundle, "Bundle holding the binary gate (multilabel stage)");
    tr->add_flag("--freeze-features", freeze_features, "Keep the feature layers fixed");
    tr->add_option("--epochs", tcfg.epochs, "Epochs")->check(CLI::PositiveNumber);
    tr->add_option("--lr", tcfg.learning_rate, "Learning rate")->check(CLI::NonNegativeNumber);
    tr->add_option("--batch-size", tcfg.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    tr->add_option("--momentum", tcfg.momentum, "SGD momentum")->check(CLI::Range(0.0, 1.0));
    tr->add_option("--weight-decay", tcfg.weight_decay, "L2 weight decay")->check(CLI::NonNegativeNumber);
    tr->add_option("--seed", tcfg.seed, "Seed");
    tr->add_option("--threshold", tcfg.threshold, "Label threshold")->check(CLI::Range(0.0, 1.0));
    tr->add_option("--label-weighting", weighting, "Positive-term weights")
        ->check(CLI::IsMember({"none", "inverse_frequency"}));
    tr->add_flag("!--positives-only", tcfg.positives_only, "Multilabel stage: train on all samples");
    tr->add_option("--stop-at-accuracy", stop_at, "Stop once train accuracy reaches this");
    tr->add_option("--out", bundle_out, "Bundle to write")->required();
    tr->add_option("--log", log_csv, "Write the training log as CSV");
    tr_flags.add_to(*tr);

    // eval
    auto* ev = app.add_subcommand("eval", "Score a bundle on a dataset split");
    std::string ev_bundle, ev_dataset, ev_split = "test";
    double ev_threshold = 0.5;
    ev->add_option("--bundle", ev_bundle, "Bundle file")->required();
    ev->add_option("--dataset", ev_dataset, "Dataset file")->required();
    ev->add_option("--split", ev_split, "Split")->check(CLI::IsMember({"train", "val", "test", "unassigned"}));
    ev->add_option("--threshold", ev_threshold, "Threshold")->check(CLI::Range(0.0, 1.0));

    // scan
    auto* sc = app.add_subcommand("scan", "Scan one contract");
    std::string sc_bundle, sc_hex, sc_file, sc_address, sc_network = "mainnet";
    double sc_threshold = 0.5;
    sc->add_option("--bundle", sc_bundle, "Bundle file")->required();
    auto* sc_src = sc->add_option_group("input")->require_option(1);
    sc_src->add_option("--hex", sc_hex, "Hex bytecode");
    sc_src->add_option("--hex-file", sc_file, "File holding hex bytecode");
    sc_src->add_option("--address", sc_address, "Contract address (fetched from Etherscan)");
    sc->add_option("--network", sc_network, "Ethereum network")->check(CLI::IsMember({"mainnet", "sepolia", "holesky"}));
    sc->add_option("--threshold", sc_threshold, "Threshold")->check(CLI::Range(0.0, 1.0));

    // serve
    auto* sv = app.add_subcommand("serve", "Serve the REST API");
    std::string sv_bundle, bind = "127.0.0.1:8080";
    std::size_t cache = 0;
    double sv_threshold = 0.5;
    sv->add_option("--bundle", sv_bundle, "Bundle file")->required();
    sv->add_option("--bind", bind, "host:port");
    sv->add_option("--cache", cache, "Response cache entries (0 disables)");
    sv->add_option("--threshold", sv_threshold, "Threshold")->check(CLI::Range(0.0, 1.0));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try
    {
        if (*ingest)
        {
            const auto vocab = vocab_path.empty() ? ingest::LabelVocabulary{} : ingest::load_vocabulary(vocab_path);
            ingest::DatasetManifest m;
            m.vocabulary = vocab;
            std::vector<ingest::ContractRecord> records;
            if (synthetic > 0)
                records = synthetic_binary ? ingest::generate_binary_synthetic(synthetic, vocab, planted, seed)
                                           : ingest::generate_synthetic(synthetic, vocab, planted, seed);
            else if (from_etherscan)
            {
                ingest::ClientOptions opts;
                opts.network = ingest::parse_network(network);
                ingest::EtherscanClient client(opts);
                const auto bugs = bugs_path.empty() ? ingest::CompilerBugMap{}
                                                    : ingest::CompilerBugMap::from_json(cli_detail::read_json(bugs_path));
                records = ingest::VerifiedCrawler(client, first_page, last_page, page_size, vocab, bugs).collect();
            }
            else
                for (const auto& f : hex_files)
                {
                    ingest::ContractRecord r;
                    r.bytecode = parse_hex(cli_detail::read_file(f));
                    r.source = ingest::RecordSource::file;
                    r.observed_at = ingest::now_utc();
                    records.push_back(ingest::label_record(std::move(r), file_labels, vocab));
                }
            for (auto& r : records)
                m.add(std::move(r));
            if (split_mode == "random")
                m = ingest::split_dataset(std::move(m), ingest::RandomSplit{seed, {ratios[0], ratios[1], ratios[2]}});
            else if (split_mode == "temporal")
            {
                if (test_start.empty())
                    throw Error(ErrorCode::InvalidConfig, "temporal split needs --test-start");
                ingest::TemporalSplit t;
                t.test_start = ingest::parse_iso8601(test_start);
                if (!val_start.empty())
                    t.val_start = ingest::parse_iso8601(val_start);
                m = ingest::split_dataset(std::move(m), t);
            }
            else
                std::fill(m.splits.begin(), m.splits.end(), ingest::Split::train);
            ingest::save_dataset(m, ds_out);
            if (json)
                out << nlohmann::json{{"records", m.records.size()},
                                      {"train", m.count(ingest::Split::train)},
                                      {"val", m.count(ingest::Split::val)},
                                      {"test", m.count(ingest::Split::test)},
                                      {"path", ds_out}}
                           .dump()
                    << '\n';
            else
                out << "wrote " << m.records.size() << " records to " << ds_out << " (train "
                    << m.count(ingest::Split::train) << ", val " << m.count(ingest::Split::val) << ", test "
                    << m.count(ingest::Split::test) << ")\n";
        }
        else if (*enc)
        {
            const auto cfg = enc_flags.config();
            const auto code = parse_hex(enc_hex.empty() ? cli_detail::read_file(enc_file) : enc_hex);
            const auto seq = bytes_to_pixels(code, cfg);
            const auto img = raw ? pixels_to_image(seq, cfg) : encode(code, cfg);
            if (!png_out.empty())
                image_to_png(img, png_out);
            if (json)
            {
                nlohmann::json first = nlohmann::json::array();
                for (std::size_t i = 0; i < std::min<std::size_t>(seq.pixels.size(), 8); ++i)
                    first.push_back({seq.pixels[i].r, seq.pixels[i].g, seq.pixels[i].b});
                out << nlohmann::json{{"bytes", code.size()},
                                      {"pixels", seq.pixels.size()},
                                      {"height", img.height()},
                                      {"width", img.width()},
                                      {"first_pixels", std::move(first)},
                                      {"encoding_hash", encoding_hash(cfg)}}
                           .dump()
                    << '\n';
            }
            else
            {
                out << code.size() << " bytes -> " << seq.pixels.size() << " pixels -> " << img.height() << "x"
                    << img.width() << " image\n";
                for (std::size_t i = 0; i < std::min<std::size_t>(seq.pixels.size(), 8); ++i)
                    out << "  (" << int(seq.pixels[i].r) << "," << int(seq.pixels[i].g) << "," << int(seq.pixels[i].b)
                        << ")\n";
            }
        }
        else if (*tr)
        {
            const auto m = ingest::load_dataset(dataset);
            tcfg.stage = stage == "binary" ? train::Stage::binary : train::Stage::multilabel;
            tcfg.label_weighting =
                weighting == "none" ? train::LabelWeighting::none : train::LabelWeighting::inverse_frequency;
            if (stop_at >= 0)
                tcfg.stop_at_train_accuracy = stop_at;
            const auto progress = [&](const train::EpochRecord& e) {
                if (!json)
                    err << "epoch " << e.epoch << "  loss " << e.mean_loss << "  acc " << e.train.accuracy << "  "
                        << static_cast<long>(e.wall_ms) << " ms\n";
            };

            service::ModelBundle bundle;
            train::TrainingLog log;
            if (tcfg.stage == train::Stage::binary)
            {
                if (!from_bundle.empty())
                    throw Error(ErrorCode::InvalidConfig, "--from applies to the multilabel stage");
                bundle.encoding = tr_flags.config();
                const auto net = net_path.empty()
                                     ? cnn::bytehue_micro({cnn::HeadKind::softmax, 2}, bundle.encoding.target_height,
                                                          bundle.encoding.target_width)
                                     : cnn::network_from_json(cli_detail::read_json(net_path));
                auto result = train::train(m, net, tcfg, bundle.encoding, std::nullopt, progress);
                bundle.binary = {net, std::move(result.params), encoding_hash(bundle.encoding)};
                bundle.vocabulary = m.vocabulary;
                log = std::move(result.log);
            }
            else
            {
                if (from_bundle.empty())
                    throw Error(ErrorCode::InvalidConfig, "the multilabel stage needs --from <bundle>");
                bundle = service::load_bundle(from_bundle);
                if (bundle.vocabulary != m.vocabulary)
                    throw Error(ErrorCode::ModelIncompatible, "dataset vocabulary differs from the bundle's");
                const auto freeze =
                    freeze_features ? train::feature_layers(bundle.binary.net) : std::vector<std::size_t>{};
                auto result = train::transfer_learn(bundle.binary.params, bundle.binary.net, m.vocabulary.size(),
                                                    freeze, m, tcfg, bundle.encoding, progress);
                bundle.multilabel = train::Model{result.net, std::move(result.params), bundle.binary.encoding_hash};
                log = std::move(result.log);
            }
            bundle.created_at = ingest::now_utc();
            service::save_bundle(bundle, bundle_out);
            if (!log_csv.empty())
            {
                std::ofstream f(log_csv);
                if (!f)
                    throw Error(ErrorCode::IoError, "cannot write '" + log_csv + "'");
                f << log.to_csv();
            }
            if (json)
            {
                auto j = log.to_json();
                j["bundle"] = bundle_out;
                j["model_version"] = bundle.model_version();
                out << j.dump() << '\n';
            }
            else
                out << "trained " << log.epochs.size() << " epochs; wrote " << bundle_out << " ("
                    << bundle.model_version() << ")\n";
        }
        else if (*ev)
        {
            const auto bundle = service::load_bundle(ev_bundle);
            const auto m = ingest::load_dataset(ev_dataset);
            const auto records = m.in_split(*ingest::parse_split(ev_split));
            nlohmann::json j;
            const auto gate = train::evaluate(bundle.binary.params, bundle.binary.net, records, ev_threshold,
                                              bundle.encoding);
            j["binary"] = train::to_json(gate);
            if (!json)
                cli_detail::print_metrics(out, "binary gate", gate);
            if (bundle.multilabel)
            {
                const auto pipe =
                    train::evaluate_pipeline(bundle.binary, *bundle.multilabel, records, bundle.encoding, ev_threshold);
                j["pipeline"] = train::to_json(pipe);
                if (!json)
                    cli_detail::print_metrics(out, "two-stage labels", pipe);
            }
            if (json)
                out << j.dump() << '\n';
        }
        else if (*sc)
        {
            service::ScannerOptions opts;
            opts.threshold = sc_threshold;
            const service::Scanner scanner(service::load_bundle(sc_bundle), opts);
            service::ScanRequest req;
            if (!sc_address.empty())
            {
                req.address = sc_address;
                req.network = ingest::parse_network(sc_network);
            }
            else
                req.bytecode = sc_hex.empty() ? cli_detail::read_file(sc_file) : sc_hex;
            const auto report = scanner.scan(req);
            if (json)
                out << report.to_json().dump() << '\n';
            else
                cli_detail::print_report(out, report);
        }
        else if (*sv)
        {
            service::ScannerOptions opts;
            opts.threshold = sv_threshold;
            opts.cache_entries = cache;
            auto scanner = std::make_shared<const service::Scanner>(service::load_bundle(sv_bundle), opts);
            service::Server server(scanner);
            const auto [host, port] = service::parse_bind(bind);
            const auto bound = server.bind(host, port);
            err << "serving " << scanner->bundle().model_version() << " on " << host << ":" << bound << '\n';
            server.run();
        }
        return kExitOk;
    }
    catch (const Error& e)
    {
        if (json)
            out << service::error_json(e).dump() << '\n';
        else
            err << "error: " << e.what() << '\n';
        return kExitError;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace bytehue
