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

#include "iox/expert.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iox::mcp
{
    using json = nlohmann::ordered_json;

    struct ExpertRegistration
    {
        std::string name;
        std::string description;
        json input_schema;

        bool operator==(const ExpertRegistration &) const = default;
    };

    // Object schema with a required "h": array of exactly n numbers.
    json make_input_schema(int n);

    // Feature length declared by a schema built like make_input_schema.
    // Throws schema error when "h" is not required or its length is not pinned.
    int schema_feature_dim(const json &schema);

    std::string default_description(const std::string &attribute_id);

    struct ToolCallRequest
    {
        std::string tool_name;
        json arguments; // validated by the handler, not by the codec

        static ToolCallRequest with_features(std::string tool_name, std::span<const double> h);

        bool operator==(const ToolCallRequest &) const = default;
    };

    enum class Status
    {
        ok,
        error,
    };

    struct ToolCallResponse
    {
        Status status = Status::error;
        double confidence = 0.0; // meaningful when status == ok
        int source_id = 0;       // 0 when the tool is unknown
        std::string detail;      // set when status == error

        bool ok() const { return status == Status::ok; }
        bool operator==(const ToolCallResponse &) const = default;
    };

    json to_json(const ToolCallResponse &response);
    ToolCallResponse response_from_json(const json &value);
    json to_json(const ExpertRegistration &registration);
    ExpertRegistration registration_from_json(const json &value);

    /// Expert pool keyed by tool name. Source ids are 1, 2, ... in registration
    /// order. Registration happens before serving; afterwards the registry is
    /// only read, so one instance can back any number of concurrent handlers.
    class Registry
    {
    public:
        struct Entry
        {
            ExpertRegistration registration;
            std::shared_ptr<const expert::MlpWeights> weights;
            int source_id = 0;
        };

        // Throws conflict on a duplicate name, schema error when the schema is
        // malformed or its n differs from the weights' input size. An explicit
        // source id (used when one server hosts a slice of a larger pool) must
        // exceed every id already assigned.
        const Entry &register_expert(const std::string &name, const std::string &description, const json &input_schema,
                                     expert::MlpWeights weights, std::optional<int> source_id = std::nullopt);

        std::vector<ExpertRegistration> list_tools() const;

        // Never throws for bad input; failures come back as ERROR responses.
        ToolCallResponse handle_call(const ToolCallRequest &request) const;

        const Entry *find(const std::string &name) const;
        std::size_t size() const { return entries_.size(); }
        bool empty() const { return entries_.empty(); }

    private:
        std::vector<Entry> entries_;
    };
}
