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

#include "iox/mcp/registry.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace iox::mcp
{
    struct ManifestEntry
    {
        std::string name;
        std::string description;
        std::string weights; // relative to the manifest's directory unless absolute

        bool operator==(const ManifestEntry &) const = default;
    };

    // Prompt-facing names for an attribute id: `display` goes into the
    // attribute list, `key` into the strict JSON answer map.
    struct AttributeAlias
    {
        std::string display;
        std::string key;

        bool operator==(const AttributeAlias &) const = default;
    };

    using AliasTable = std::map<std::string, AttributeAlias>;

    struct Manifest
    {
        std::vector<ManifestEntry> experts;
        AliasTable aliases;
        std::filesystem::path base_dir;
    };

    // {"experts": [{"name", "description", "weights"}...], "aliases": {id: {"display", "key"}}}
    Manifest load_manifest(const std::filesystem::path &path);

    void save_manifest(const Manifest &manifest, const std::filesystem::path &path);

    // Registers experts in manifest order. With `only` non-empty, just those
    // experts are registered but each keeps its manifest position as source id,
    // so per-expert servers report the same ids as a single pooled server.
    std::shared_ptr<Registry> build_registry(const Manifest &manifest, const std::vector<std::string> &only = {});
}
