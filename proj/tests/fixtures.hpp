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

// Small expert pools and request suites shared by the tests and the acceptance run.

#include "iox/channel_sim.hpp"
#include "iox/expert.hpp"
#include "iox/host.hpp"
#include "iox/mcp/manifest.hpp"
#include "iox/mcp/protocol.hpp"
#include "iox/mcp/registry.hpp"
#include "iox/random.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fixture
{
    inline iox::expert::MlpWeights weights_for(std::size_t index, int n = 64, std::uint64_t seed = 1)
    {
        return iox::expert::MlpWeights::glorot_uniform(n, 32, 16, iox::mix_seed(seed, index));
    }

    // Registry with the four built-in attributes, source ids 1..4.
    inline std::shared_ptr<iox::mcp::Registry> registry(int n = 64, std::uint64_t seed = 1)
    {
        auto reg = std::make_shared<iox::mcp::Registry>();
        const auto &attrs = iox::channel::supported_attributes();
        for (std::size_t i = 0; i < attrs.size(); ++i)
            reg->register_expert(attrs[i], iox::mcp::default_description(attrs[i]), iox::mcp::make_input_schema(n),
                                 weights_for(i, n, seed));
        return reg;
    }

    // Same pool as registry() written as weight files plus manifest.json.
    inline std::filesystem::path write_models(const std::filesystem::path &dir, int n = 64, std::uint64_t seed = 1)
    {
        std::filesystem::create_directories(dir);
        iox::mcp::Manifest m;
        m.aliases = iox::host::default_aliases();
        const auto &attrs = iox::channel::supported_attributes();
        for (std::size_t i = 0; i < attrs.size(); ++i)
        {
            const std::string file = attrs[i] + ".weights.json";
            iox::expert::save_weights(weights_for(i, n, seed), dir / file);
            m.experts.push_back({attrs[i], iox::mcp::default_description(attrs[i]), file});
        }
        iox::mcp::save_manifest(m, dir / "manifest.json");
        return dir / "manifest.json";
    }

    inline std::vector<double> random_h(std::mt19937_64 &gen, std::size_t n = 64)
    {
        std::uniform_real_distribution<double> u(0.0, 3.0);
        std::vector<double> h(n);
        for (auto &v : h)
            v = u(gen);
        return h;
    }

    // Mostly valid calls with some unknown tools, wrong lengths and bad arguments.
    inline std::vector<iox::mcp::ToolCallRequest> request_suite(std::size_t count, std::uint64_t seed,
                                                                const std::vector<std::string> &tools)
    {
        std::mt19937_64 gen(seed);
        std::vector<iox::mcp::ToolCallRequest> out;
        for (std::size_t i = 0; i < count; ++i)
        {
            const std::string &tool = tools[i % tools.size()];
            switch (i % 10)
            {
            case 7:
                out.push_back(iox::mcp::ToolCallRequest::with_features("detect_unknown", random_h(gen)));
                break;
            case 8:
                out.push_back(iox::mcp::ToolCallRequest::with_features(tool, random_h(gen, 63)));
                break;
            case 9:
                out.push_back({tool, {{"h", "not an array"}}});
                break;
            default:
                out.push_back(iox::mcp::ToolCallRequest::with_features(tool, random_h(gen)));
            }
        }
        return out;
    }

    inline std::string random_text(std::mt19937_64 &gen)
    {
        static const std::vector<std::string> pieces = {"a", "Z", "_", "/", "\"", "\\", "\n",
                                                        " ", "é", "中", "\U0001F4E1", "{", "}"};
        std::uniform_int_distribution<std::size_t> len(0, 12), pick(0, pieces.size() - 1);
        std::string s;
        for (std::size_t i = len(gen); i > 0; --i)
            s += pieces[pick(gen)];
        return s;
    }

    // Arbitrary requests: any int64 id, odd-length vectors, wide exponents, non-ASCII tool names.
    inline iox::mcp::RpcRequest random_request(std::mt19937_64 &gen)
    {
        std::uniform_int_distribution<std::int64_t> ids(std::numeric_limits<std::int64_t>::min(),
                                                         std::numeric_limits<std::int64_t>::max());
        iox::mcp::RpcRequest r;
        r.id = ids(gen);
        if (gen() % 4 == 0)
            return r;
        r.method = iox::mcp::Method::tools_call;
        std::normal_distribution<double> normal(0.0, 1e3);
        std::vector<double> h(gen() % 70);
        for (auto &v : h)
            v = (gen() % 5 == 0) ? std::ldexp(normal(gen), static_cast<int>(gen() % 600) - 300) : normal(gen);
        r.call = iox::mcp::ToolCallRequest::with_features(random_text(gen), h);
        if (gen() % 5 == 0)
            r.call->arguments["extra"] = {{"nested", random_text(gen)}, {"flag", true}};
        return r;
    }
}
