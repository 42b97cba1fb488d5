// SPDX-License-Identifier: Apache-2.0
//
// iox - wireless Internet-of-Experts over a JSON-RPC tool layer
// Copyright (C) 2026 The iox authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "cli.hpp"

#include "iox/channel_sim.hpp"
#include "iox/dataset.hpp"
#include "iox/eval.hpp"
#include "iox/expert.hpp"
#include "iox/format.hpp"
#include "iox/host.hpp"
#include "iox/mcp/client.hpp"
#include "iox/mcp/manifest.hpp"
#include "iox/mcp/server.hpp"
#include "iox/random.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace iox::cli
{
    namespace
    {
        namespace fs = std::filesystem;
        using json = nlohmann::ordered_json;

        std::atomic<bool> g_signalled{false};

        extern "C" void on_signal(int) { g_signalled = true; }

        // Stable per-attribute seed salt (FNV-1a).
        std::uint64_t salt(const std::string &text)
        {
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (unsigned char c : text)
            {
                h ^= c;
                h *= 0x100000001b3ULL;
            }
            return h;
        }

        std::vector<std::string> resolve_attributes(const std::vector<std::string> &requested)
        {
            const auto &known = channel::supported_attributes();
            if (requested.empty())
                return known;
            for (const auto &a : requested)
                if (std::find(known.begin(), known.end(), a) == known.end())
                    fail(ErrorKind::usage, "unknown attribute " + a);
            return requested;
        }

        std::string weights_file(const std::string &attribute) { return attribute + ".weights.json"; }
        std::string history_file(const std::string &attribute) { return attribute + ".history.csv"; }

        template <class Fn>
        int guarded(std::ostream &err, Fn &&fn)
        {
            try
            {
                return fn();
            }
            catch (const Error &e)
            {
                err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
                return e.kind() == ErrorKind::usage ? kExitUsage : kExitRuntime;
            }
            catch (const std::exception &e)
            {
                err << "error: " << e.what() << '\n';
                return kExitRuntime;
            }
        }

        mcp::CallLogger make_call_logger(std::ostream &err, bool quiet)
        {
            if (quiet)
                return {};
            auto mutex = std::make_shared<std::mutex>();
            return [&err, mutex](const mcp::CallLog &log) {
                std::lock_guard lock(*mutex);
                err << log.method;
                if (!log.tool.empty())
                    err << ' ' << log.tool;
                err << ' ' << log.status << ' ' << log.latency.count() << "us\n";
            };
        }
    }

    std::vector<double> parse_vector(const std::string &text)
    {
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '[')
        {
            try
            {
                return json::parse(text).get<std::vector<double>>();
            }
            catch (const json::exception &e)
            {
                fail(ErrorKind::format, std::string("channel vector: ") + e.what());
            }
        }
        std::string spaced = text;
        std::replace(spaced.begin(), spaced.end(), ',', ' ');
        std::istringstream in(spaced);
        std::vector<double> values;
        std::string token;
        while (in >> token)
        {
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(token, &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used != token.size())
                fail(ErrorKind::format, "channel vector: not a number: " + token);
            values.push_back(v);
        }
        return values;
    }

    int cmd_gen_data(const GenDataOptions &o, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            const auto attributes = resolve_attributes(o.attributes);
            if (o.size < 2)
                fail(ErrorKind::usage, "--size must be at least 2");
            if (o.pool < o.size)
                fail(ErrorKind::usage, "--pool must be at least --size");
            if (o.n < 1)
                fail(ErrorKind::usage, "--n must be positive");

            channel::SceneSampler sampler;
            sampler.n = o.n;
            const auto pool = channel::synth_pool(sampler, o.pool, o.seed, channel::supported_attributes());

            std::vector<dataset::AttributeDataset> built;
            for (const auto &attr : attributes)
            {
                try
                {
                    built.push_back(dataset::build_attribute_dataset(attr, pool, o.size, mix_seed(o.seed, salt(attr))));
                }
                catch (const Error &e)
                {
                    throw Error(e.kind(), attr + ": " + e.what());
                }
            }

            fs::create_directories(o.out);
            for (const auto &ds : built)
            {
                const fs::path path = o.out / dataset::dataset_file_name(ds.attribute_id);
                dataset::save_dataset(ds, path);
                out << ds.attribute_id << ": " << ds.size() << " examples (" << ds.positives() << " positive) -> "
                    << path.string() << '\n';
            }
            return kExitOk;
        });
    }

    int cmd_train(const TrainOptions &o, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            const auto attributes = resolve_attributes(o.attributes);
            if (o.epochs < 1)
                fail(ErrorKind::usage, "--epochs must be at least 1");
            if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0))
                fail(ErrorKind::usage, "--test-fraction must be in (0, 1)");
            if (!(o.min_accuracy >= 0.0 && o.min_accuracy <= 1.0))
                fail(ErrorKind::usage, "--min-accuracy must be in [0, 1]");
            expert::TrainConfig base;
            base.epochs = o.epochs;
            base.learning_rate = o.learning_rate;
            base.batch_size = o.batch_size;
            base.early_stop_patience = o.patience;
            try
            {
                base.validate();
            }
            catch (const Error &e)
            {
                fail(ErrorKind::usage, e.what());
            }

            std::vector<dataset::AttributeDataset> datasets;
            for (const auto &attr : attributes)
                datasets.push_back(dataset::load_dataset(o.data / dataset::dataset_file_name(attr)));

            struct Trained
            {
                std::string attribute;
                expert::TrainResult result;
            };
            std::vector<Trained> trained;
            for (const auto &ds : datasets)
            {
                const auto parts = dataset::split(ds, o.test_fraction, mix_seed(o.seed, salt(ds.attribute_id) ^ 1));
                for (const auto &w : parts.warnings)
                    err << ds.attribute_id << ": warning: " << w << '\n';
                expert::TrainConfig cfg = base;
                cfg.seed = mix_seed(o.seed, salt(ds.attribute_id));
                const auto progress = [&](int epoch, double loss, double acc) {
                    if (o.progress_every > 0 && (epoch % o.progress_every == 0 || epoch + 1 == cfg.epochs))
                        err << ds.attribute_id << " epoch " << epoch << " loss " << format_double(loss)
                            << " test_accuracy " << format_double(acc) << '\n';
                };
                trained.push_back({ds.attribute_id, expert::train(cfg, parts.train, parts.test, progress)});
            }

            fs::create_directories(o.out);
            mcp::Manifest manifest;
            manifest.aliases = host::default_aliases();
            bool below_floor = false;
            for (const auto &t : trained)
            {
                expert::save_weights(t.result.weights, o.out / weights_file(t.attribute));
                expert::save_history(t.result.history, o.smoothing, o.out / history_file(t.attribute));
                manifest.experts.push_back({t.attribute, mcp::default_description(t.attribute), weights_file(t.attribute)});
                const auto &acc = t.result.history.test_accuracy;
                const double final_acc = acc.empty() ? 0.0 : acc.back();
                out << t.attribute << ": " << t.result.history.epochs() << " epochs, held-out accuracy "
                    << format_double(final_acc) << '\n';
                if (final_acc < o.min_accuracy)
                {
                    err << t.attribute << ": held-out accuracy " << format_double(final_acc) << " below floor "
                        << format_double(o.min_accuracy) << '\n';
                    below_floor = true;
                }
            }
            mcp::save_manifest(manifest, o.out / "manifest.json");
            return below_floor ? kExitRuntime : kExitOk;
        });
    }

    int cmd_serve(const ServeOptions &o, std::ostream &out, std::ostream &err, const std::atomic<bool> *stop)
    {
        return guarded(err, [&] {
            const auto manifest = mcp::load_manifest(o.manifest);
            const auto registry = mcp::build_registry(manifest, o.only);
            const auto logger = make_call_logger(err, o.quiet);

            if (o.stdio)
            {
                mcp::serve_stdio(mcp::Dispatcher(registry, logger), std::cin, out);
                return kExitOk;
            }

            struct sigaction action = {}, old_int = {}, old_term = {};
            if (!stop)
            {
                g_signalled = false;
                action.sa_handler = on_signal;
                sigemptyset(&action.sa_mask);
                sigaction(SIGINT, &action, &old_int);
                sigaction(SIGTERM, &action, &old_term);
                stop = &g_signalled;
            }

            mcp::HttpServer server(registry, logger);
            server.start(o.host, o.port);
            out << "listening on http://" << o.host << ':' << server.port() << mcp::kRpcPath << " with "
                << registry->list_tools().size() << " tools" << std::endl;
            while (!stop->load() && server.running())
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
            server.stop();
            if (stop == &g_signalled)
            {
                sigaction(SIGINT, &old_int, nullptr);
                sigaction(SIGTERM, &old_term, nullptr);
            }
            out << "stopped" << std::endl;
            return kExitOk;
        });
    }

    int cmd_call(const CallOptions &o, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            if (!o.list && o.tool.empty())
                fail(ErrorKind::usage, "--tool is required (or use --list)");
            if (!o.list && o.h.empty() == o.h_file.empty())
                fail(ErrorKind::usage, "supply exactly one of --h and --h-file");
            const auto endpoint = mcp::Endpoint::parse(o.server);
            mcp::HttpClient client(endpoint, std::chrono::milliseconds(o.timeout_ms));
            if (o.list)
            {
                json tools = json::array();
                for (const auto &r : client.list_tools())
                    tools.push_back(mcp::to_json(r));
                out << tools.dump(2) << '\n';
                return kExitOk;
            }
            std::string text = o.h;
            if (!o.h_file.empty())
            {
                std::ifstream in(o.h_file);
                if (!in)
                    fail(ErrorKind::io, "cannot read " + o.h_file.string());
                std::ostringstream ss;
                ss << in.rdbuf();
                text = ss.str();
            }
            const auto h = parse_vector(text);
            const auto response = client.call_expert(o.tool, h);
            out << mcp::to_json(response).dump() << '\n';
            return response.ok() ? kExitOk : kExitRuntime;
        });
    }

    int cmd_evaluate(const EvaluateOptions &o, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            eval::ExperimentConfig config;
            config.sample_count = o.samples;
            config.seed = o.seed;
            config.attributes = resolve_attributes(o.attributes);
            if (o.samples < 1)
                fail(ErrorKind::usage, "--samples must be at least 1");

            std::optional<host::LlmConfig> llm = host::LlmConfig::from_env();
            if (!o.llm_url.empty())
            {
                if (!llm)
                    llm.emplace();
                llm->url = o.llm_url;
            }
            if (llm && !o.llm_model.empty())
                llm->model = o.llm_model;

            config.policies.clear();
            for (const auto &name : o.policies)
            {
                eval::PolicySpec spec;
                if (name == "threshold")
                    spec = eval::PolicySpec::mcp_threshold(o.threshold);
                else if (name == "naive")
                    spec = eval::PolicySpec::naive_baseline();
                else if (name == "llm" || name == "llm-raw")
                {
                    if (!llm)
                        fail(ErrorKind::usage, "--policy " + name + " needs an LLM endpoint (IOX_LLM_URL or --llm-url)");
                    spec = name == "llm" ? eval::PolicySpec::llm_mcp(*llm) : eval::PolicySpec::llm_raw(*llm);
                }
                else
                    fail(ErrorKind::usage, "unknown policy " + name);
                spec.agent.parallel_calls = o.parallel_calls;
                config.policies.push_back(spec);
            }
            std::vector<eval::ReportFormat> formats;
            for (const auto &f : o.formats)
                formats.push_back(eval::parse_report_format(f));
            try
            {
                config.validate();
            }
            catch (const Error &e)
            {
                fail(ErrorKind::usage, e.what());
            }

            const bool needs_tools = std::any_of(config.policies.begin(), config.policies.end(),
                                                 [](const eval::PolicySpec &p) { return p.uses_mcp(); });
            std::optional<mcp::Manifest> manifest;
            if (fs::exists(o.manifest))
                manifest = mcp::load_manifest(o.manifest);

            // Loopback servers live for the duration of the run.
            std::vector<std::unique_ptr<mcp::HttpServer>> servers;
            std::vector<std::shared_ptr<mcp::ToolTransport>> clients;
            if (!o.servers.empty())
            {
                for (const auto &s : o.servers)
                    clients.push_back(std::make_shared<mcp::HttpClient>(mcp::Endpoint::parse(s)));
            }
            else if (needs_tools)
            {
                if (!manifest)
                    fail(ErrorKind::io, "manifest not found: " + o.manifest.string());
                std::vector<std::vector<std::string>> groups;
                if (o.per_expert_servers)
                    for (const auto &e : manifest->experts)
                        groups.push_back({e.name});
                else
                    groups.push_back({});
                for (const auto &only : groups)
                {
                    auto server = std::make_unique<mcp::HttpServer>(mcp::build_registry(*manifest, only));
                    server->start("127.0.0.1", 0);
                    clients.push_back(std::make_shared<mcp::HttpClient>(mcp::Endpoint{"127.0.0.1", server->port()}));
                    servers.push_back(std::move(server));
                }
            }
            std::shared_ptr<mcp::ToolTransport> transport;
            if (clients.size() == 1)
                transport = clients.front();
            else if (clients.size() > 1)
                transport = std::make_shared<mcp::RoutedTransport>(clients);

            host::AliasTable aliases = host::default_aliases();
            if (manifest)
                for (const auto &[id, alias] : manifest->aliases)
                    aliases[id] = alias;

            eval::Logger log;
            if (!o.quiet)
                log = [&err](const std::string &line) { err << line << '\n'; };
            eval::Report report =
                eval::run_experiment(config, transport.get(), aliases, eval::default_llm_factory, log);
            for (auto &s : servers)
                s->stop();

            if (manifest)
                for (const auto &attr : config.attributes)
                {
                    const fs::path path = manifest->base_dir / history_file(attr);
                    if (fs::exists(path))
                        report.curves.push_back({attr, expert::load_history(path)});
                }

            fs::create_directories(o.out);
            for (const auto f : formats)
                eval::emit_report(report, f, o.out / ("report" + eval::extension(f)));
            out << eval::render_table(report);
            return kExitOk;
        });
    }

    int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"iox: wireless experts served over a JSON-RPC tool layer", "iox"};
        app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags take precedence");
        app.require_subcommand(1);

        GenDataOptions gen;
        auto *gen_cmd = app.add_subcommand("gen-data", "Generate balanced per-attribute datasets");
        gen_cmd->add_option("--out", gen.out, "Output directory")->capture_default_str();
        gen_cmd->add_option("--attributes", gen.attributes, "Attributes to generate (default: all)")->delimiter(',');
        gen_cmd->add_option("--size", gen.size, "Examples per attribute")->capture_default_str();
        gen_cmd->add_option("--pool", gen.pool, "Scenes in the shared pool")->capture_default_str();
        gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
        gen_cmd->add_option("--n", gen.n, "Feature length")->capture_default_str();

        TrainOptions tr;
        int patience = 0;
        auto *train_cmd = app.add_subcommand("train", "Train one expert per dataset");
        train_cmd->add_option("--data", tr.data, "Dataset directory")->capture_default_str();
        train_cmd->add_option("--out", tr.out, "Model directory")->capture_default_str();
        train_cmd->add_option("--attributes", tr.attributes, "Attributes to train (default: all)")->delimiter(',');
        train_cmd->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
        train_cmd->add_option("--lr", tr.learning_rate, "Learning rate")->capture_default_str();
        train_cmd->add_option("--batch", tr.batch_size, "Mini-batch size")->capture_default_str();
        train_cmd->add_option("--test-fraction", tr.test_fraction, "Held-out fraction")->capture_default_str();
        train_cmd->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
        train_cmd->add_option("--patience", patience, "Early-stopping patience in epochs (0: off)");
        train_cmd->add_option("--min-accuracy", tr.min_accuracy, "Exit 2 if any expert ends below this")
            ->capture_default_str();
        train_cmd->add_option("--smoothing", tr.smoothing, "Moving-average window for history files")
            ->capture_default_str();
        train_cmd->add_option("--progress", tr.progress_every, "Log every N epochs (0: quiet)")->capture_default_str();

        ServeOptions sv;
        auto *serve_cmd = app.add_subcommand("serve", "Serve experts over HTTP or stdio");
        serve_cmd->add_option("--manifest", sv.manifest, "Expert manifest")->capture_default_str();
        serve_cmd->add_option("--host", sv.host, "Bind address")->capture_default_str();
        serve_cmd->add_option("--port", sv.port, "Port (0: any free port)")->capture_default_str();
        serve_cmd->add_option("--only", sv.only, "Serve only these experts")->delimiter(',');
        serve_cmd->add_flag("--stdio", sv.stdio, "Newline-delimited JSON-RPC on stdin/stdout");
        serve_cmd->add_flag("--quiet", sv.quiet, "Do not log calls");

        CallOptions cl;
        auto *call_cmd = app.add_subcommand("call", "Call one expert and print its response");
        call_cmd->set_help_flag("--help", "Print this help message and exit"); // frees --h for the vector
        call_cmd->add_option("--server", cl.server, "Server address")->capture_default_str();
        call_cmd->add_option("--tool", cl.tool, "Expert name");
        call_cmd->add_option("--h", cl.h, "Channel vector, comma separated");
        call_cmd->add_option("--h-file", cl.h_file, "File holding the channel vector");
        call_cmd->add_flag("--list", cl.list, "List the server's tools instead");
        call_cmd->add_option("--timeout-ms", cl.timeout_ms, "Request timeout")->capture_default_str();

        EvaluateOptions ev;
        auto *eval_cmd = app.add_subcommand("evaluate", "Run the accuracy experiment");
        eval_cmd->add_option("--manifest", ev.manifest, "Expert manifest for loopback servers")->capture_default_str();
        eval_cmd->add_option("--server", ev.servers, "Existing server(s) to use instead of loopback ones");
        eval_cmd->add_flag("--per-expert-servers", ev.per_expert_servers, "One loopback server per expert");
        eval_cmd->add_option("--attributes", ev.attributes, "Attributes to query (default: all)")->delimiter(',');
        eval_cmd->add_option("--samples", ev.samples, "Number of scenes")->capture_default_str();
        eval_cmd->add_option("--seed", ev.seed, "Random seed")->capture_default_str();
        eval_cmd->add_option("--policy", ev.policies, "threshold, naive, llm, llm-raw")->delimiter(',')
            ->capture_default_str();
        eval_cmd->add_option("--threshold", ev.threshold, "Confidence threshold")->capture_default_str();
        eval_cmd->add_option("--out", ev.out, "Report directory")->capture_default_str();
        eval_cmd->add_option("--format", ev.formats, "table, csv, json")->delimiter(',')->capture_default_str();
        eval_cmd->add_option("--llm-url", ev.llm_url, "LLM endpoint (overrides IOX_LLM_URL)");
        eval_cmd->add_option("--llm-model", ev.llm_model, "LLM model name (overrides IOX_LLM_MODEL)");
        eval_cmd->add_flag("--parallel-calls", ev.parallel_calls, "Call the planned experts concurrently");
        eval_cmd->add_flag("--quiet", ev.quiet, "No progress log");

        std::vector<char *> argv;
        std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"iox"} : args;
        for (auto &a : storage)
            argv.push_back(a.data());
        try
        {
            app.parse(static_cast<int>(argv.size()), argv.data());
        }
        catch (const CLI::ParseError &e)
        {
            const int code = app.exit(e, out, err);
            return code == 0 ? kExitOk : kExitUsage;
        }
        if (patience > 0)
            tr.patience = patience;

        if (*gen_cmd)
            return cmd_gen_data(gen, out, err);
        if (*train_cmd)
            return cmd_train(tr, out, err);
        if (*serve_cmd)
            return cmd_serve(sv, out, err);
        if (*call_cmd)
            return cmd_call(cl, out, err);
        return cmd_evaluate(ev, out, err);
    }
}
