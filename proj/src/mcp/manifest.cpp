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

#include "iox/mcp/manifest.hpp"

#include "iox/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace iox::mcp
{
    Manifest load_manifest(const std::filesystem::path &path)
    {
        std::ifstream file(path, std::ios::binary);
        if (!file)
            fail(ErrorKind::io, "cannot open manifest: " + path.string());
        std::stringstream buf;
        buf << file.rdbuf();

        json doc;
        try
        {
            doc = json::parse(buf.str());
        }
        catch (const json::parse_error &e)
        {
            fail(ErrorKind::schema, "manifest " + path.string() + ": " + e.what());
        }
        if (!doc.is_object() || !doc.contains("experts") || !doc["experts"].is_array())
            fail(ErrorKind::schema, "manifest " + path.string() + ": missing \"experts\" array");

        Manifest m;
        m.base_dir = path.parent_path();
        for (const auto &e : doc["experts"])
        {
            if (!e.is_object() || !e.contains("name") || !e["name"].is_string() || !e.contains("weights") ||
                !e["weights"].is_string())
                fail(ErrorKind::schema, "manifest " + path.string() + ": each expert needs string name and weights");
            ManifestEntry entry;
            entry.name = e["name"].get<std::string>();
            entry.weights = e["weights"].get<std::string>();
            entry.description = e.contains("description") && e["description"].is_string()
                                    ? e["description"].get<std::string>()
                                    : default_description(entry.name);
            m.experts.push_back(std::move(entry));
        }
        if (doc.contains("aliases"))
        {
            if (!doc["aliases"].is_object())
                fail(ErrorKind::schema, "manifest " + path.string() + ": \"aliases\" must be an object");
            for (const auto &[id, a] : doc["aliases"].items())
            {
                if (!a.is_object() || !a.contains("display") || !a["display"].is_string() || !a.contains("key") ||
                    !a["key"].is_string())
                    fail(ErrorKind::schema, "manifest " + path.string() + ": alias '" + id +
                                                "' needs string display and key");
                m.aliases[id] = {a["display"].get<std::string>(), a["key"].get<std::string>()};
            }
        }
        return m;
    }

    void save_manifest(const Manifest &manifest, const std::filesystem::path &path)
    {
        json doc;
        doc["experts"] = json::array();
        for (const auto &e : manifest.experts)
            doc["experts"].push_back({{"name", e.name}, {"description", e.description}, {"weights", e.weights}});
        json aliases = json::object();
        for (const auto &[id, a] : manifest.aliases)
            aliases[id] = {{"display", a.display}, {"key", a.key}};
        doc["aliases"] = aliases;

        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file)
            fail(ErrorKind::io, "cannot open for writing: " + path.string());
        file << doc.dump(2) << "\n";
    }

    std::shared_ptr<Registry> build_registry(const Manifest &manifest, const std::vector<std::string> &only)
    {
        for (const auto &name : only)
            if (std::none_of(manifest.experts.begin(), manifest.experts.end(),
                             [&](const ManifestEntry &e) { return e.name == name; }))
                fail(ErrorKind::schema, "manifest has no expert named " + name);

        auto registry = std::make_shared<Registry>();
        for (std::size_t i = 0; i < manifest.experts.size(); ++i)
        {
            const auto &e = manifest.experts[i];
            if (!only.empty() && std::find(only.begin(), only.end(), e.name) == only.end())
                continue;
            std::filesystem::path weights_path = e.weights;
            if (weights_path.is_relative())
                weights_path = manifest.base_dir / weights_path;
            auto weights = expert::load_weights(weights_path);
            const int n = weights.n;
            registry->register_expert(e.name, e.description, make_input_schema(n), std::move(weights),
                                      static_cast<int>(i) + 1);
        }
        return registry;
    }
}
