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

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace iox::cli
{
    inline constexpr int kExitOk = 0;
    inline constexpr int kExitUsage = 1;
    inline constexpr int kExitRuntime = 2;

    struct GenDataOptions
    {
        std::filesystem::path out = "data";
        std::vector<std::string> attributes; // empty: all supported
        std::size_t size = 4000;
        std::size_t pool = 12000;
        std::uint64_t seed = 1;
        int n = 64;
    };

    struct TrainOptions
    {
        std::filesystem::path data = "data";
        std::filesystem::path out = "models";
        std::vector<std::string> attributes;
        int epochs = 4000;
        double learning_rate = 0.01;
        int batch_size = 64;
        double test_fraction = 0.2;
        std::uint64_t seed = 1;
        std::optional<int> patience;
        double min_accuracy = 0.0;
        std::size_t smoothing = 50;
        int progress_every = 500; // 0 silences per-epoch progress
    };

    struct ServeOptions
    {
        std::filesystem::path manifest = "models/manifest.json";
        std::string host = "127.0.0.1";
        int port = 8080;
        std::vector<std::string> only;
        bool stdio = false;
        bool quiet = false;
    };

    struct CallOptions
    {
        std::string server = "127.0.0.1:8080";
        std::string tool;
        std::string h;                 // inline, comma or space separated
        std::filesystem::path h_file;  // JSON array or separated numbers
        bool list = false;
        int timeout_ms = 5000;
    };

    struct EvaluateOptions
    {
        std::filesystem::path manifest = "models/manifest.json";
        std::vector<std::string> servers; // empty: spawn loopback servers from the manifest
        bool per_expert_servers = false;
        std::vector<std::string> attributes;
        std::size_t samples = 1000;
        std::uint64_t seed = 7;
        std::vector<std::string> policies = {"threshold", "naive"};
        double threshold = 0.5;
        std::filesystem::path out = "results";
        std::vector<std::string> formats = {"table", "csv", "json"};
        std::string llm_url;
        std::string llm_model;
        bool parallel_calls = false;
        bool quiet = false;
    };

    int cmd_gen_data(const GenDataOptions &options, std::ostream &out, std::ostream &err);
    int cmd_train(const TrainOptions &options, std::ostream &out, std::ostream &err);
    // Serves until `stop` becomes true (or SIGINT/SIGTERM when null).
    int cmd_serve(const ServeOptions &options, std::ostream &out, std::ostream &err,
                  const std::atomic<bool> *stop = nullptr);
    int cmd_call(const CallOptions &options, std::ostream &out, std::ostream &err);
    int cmd_evaluate(const EvaluateOptions &options, std::ostream &out, std::ostream &err);

    // Parses argv (argv[0] is the program name), dispatches, maps errors to exit codes.
    int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

    // Reads a channel vector: JSON array, or numbers separated by commas/whitespace.
    std::vector<double> parse_vector(const std::string &text);
}
