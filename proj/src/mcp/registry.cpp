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

#include "iox/mcp/registry.hpp"

#include "iox/channel_sim.hpp"
#include "iox/error.hpp"

#include <cmath>

namespace iox::mcp
{
    json make_input_schema(int n)
    {
        json h;
        h["type"] = "array";
        h["items"] = {{"type", "number"}};
        h["minItems"] = n;
        h["maxItems"] = n;
        h["description"] = "Channel vector of " + std::to_string(n) + " real values";
        json schema;
        schema["type"] = "object";
        schema["properties"] = {{"h", h}};
        schema["required"] = json::array({"h"});
        return schema;
    }

    int schema_feature_dim(const json &schema)
    {
        if (!schema.is_object() || schema.value("type", "") != "object")
            fail(ErrorKind::schema, "input_schema must be an object schema");
        const auto req = schema.find("required");
        bool requires_h = false;
        if (req != schema.end() && req->is_array())
            for (const auto &r : *req)
                requires_h = requires_h || r == "h";
        if (!requires_h)
            fail(ErrorKind::schema, "input_schema must list \"h\" as required");
        if (!schema.contains("properties") || !schema["properties"].is_object() ||
            !schema["properties"].contains("h"))
            fail(ErrorKind::schema, "input_schema must declare property \"h\"");
        const auto &h = schema["properties"]["h"];
        if (!h.is_object() || h.value("type", "") != "array")
            fail(ErrorKind::schema, "input_schema property \"h\" must be an array");
        if (!h.contains("minItems") || !h.contains("maxItems") || !h["minItems"].is_number_integer() ||
            h["minItems"] != h["maxItems"] || h["minItems"].get<int>() < 1)
            fail(ErrorKind::schema, "input_schema property \"h\" must pin its length with minItems == maxItems >= 1");
        return h["minItems"].get<int>();
    }

    std::string default_description(const std::string &attribute_id)
    {
        if (attribute_id == channel::kDetectLos)
            return "Returns the probability that the scene is under LoS condition given channel features.";
        if (attribute_id == channel::kDetectHighDoppler)
            return "Returns the probability that the scene exhibits a high Doppler shift given channel features.";
        if (attribute_id == channel::kDetectRayleigh)
            return "Returns the probability that the scene is under Rayleigh fading given channel features.";
        if (attribute_id == channel::kDetectRicianK10)
            return "Returns the probability that the scene is under Rician fading with K = 10 given channel features.";
        return "Returns the probability that attribute " + attribute_id + " holds given channel features.";
    }

    ToolCallRequest ToolCallRequest::with_features(std::string tool_name, std::span<const double> h)
    {
        ToolCallRequest req;
        req.tool_name = std::move(tool_name);
        req.arguments = json::object();
        req.arguments["h"] = std::vector<double>(h.begin(), h.end());
        return req;
    }

    json to_json(const ToolCallResponse &response)
    {
        json out = json::object();
        if (response.ok())
            out["confidence"] = response.confidence;
        out["status"] = response.ok() ? "OK" : "ERROR";
        out["source_id"] = response.source_id;
        if (!response.ok())
            out["detail"] = response.detail;
        return out;
    }

    ToolCallResponse response_from_json(const json &value)
    {
        if (!value.is_object() || !value.contains("status") || !value["status"].is_string() ||
            !value.contains("source_id") || !value["source_id"].is_number_integer())
            fail(ErrorKind::protocol, "tool response must carry string status and integer source_id");
        ToolCallResponse r;
        r.source_id = value["source_id"].get<int>();
        const auto status = value["status"].get<std::string>();
        if (status == "OK")
        {
            if (!value.contains("confidence") || !value["confidence"].is_number())
                fail(ErrorKind::protocol, "OK tool response must carry a numeric confidence");
            r.status = Status::ok;
            r.confidence = value["confidence"].get<double>();
            if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
                fail(ErrorKind::protocol, "confidence outside [0, 1]");
        }
        else if (status == "ERROR")
        {
            if (!value.contains("detail") || !value["detail"].is_string())
                fail(ErrorKind::protocol, "ERROR tool response must carry a detail string");
            r.status = Status::error;
            r.detail = value["detail"].get<std::string>();
        }
        else
            fail(ErrorKind::protocol, "unknown tool status: " + status);
        return r;
    }

    json to_json(const ExpertRegistration &registration)
    {
        json out;
        out["name"] = registration.name;
        out["description"] = registration.description;
        out["input_schema"] = registration.input_schema;
        return out;
    }

    ExpertRegistration registration_from_json(const json &value)
    {
        if (!value.is_object() || !value.contains("name") || !value["name"].is_string() ||
            !value.contains("description") || !value["description"].is_string() || !value.contains("input_schema"))
            fail(ErrorKind::protocol, "tool listing entry must carry name, description and input_schema");
        return {value["name"].get<std::string>(), value["description"].get<std::string>(), value["input_schema"]};
    }

    const Registry::Entry &Registry::register_expert(const std::string &name, const std::string &description,
                                                     const json &input_schema, expert::MlpWeights weights,
                                                     std::optional<int> source_id)
    {
        if (name.empty())
            fail(ErrorKind::schema, "expert name must be non-empty");
        if (find(name))
            fail(ErrorKind::conflict, "expert already registered: " + name);
        const int n = schema_feature_dim(input_schema);
        weights.validate();
        if (weights.n != n)
            fail(ErrorKind::schema, "expert '" + name + "' takes " + std::to_string(weights.n) +
                                        " inputs but its schema declares n=" + std::to_string(n));
        Entry entry;
        entry.registration = {name, description, input_schema};
        entry.weights = std::make_shared<const expert::MlpWeights>(std::move(weights));
        const int next = entries_.empty() ? 1 : entries_.back().source_id + 1;
        if (source_id && *source_id < next)
            fail(ErrorKind::conflict, "source_id " + std::to_string(*source_id) + " is not above existing ids");
        entry.source_id = source_id.value_or(next);
        entries_.push_back(std::move(entry));
        return entries_.back();
    }

    std::vector<ExpertRegistration> Registry::list_tools() const
    {
        std::vector<ExpertRegistration> out;
        out.reserve(entries_.size());
        for (const auto &e : entries_)
            out.push_back(e.registration);
        return out;
    }

    const Registry::Entry *Registry::find(const std::string &name) const
    {
        for (const auto &e : entries_)
            if (e.registration.name == name)
                return &e;
        return nullptr;
    }

    ToolCallResponse Registry::handle_call(const ToolCallRequest &request) const
    {
        ToolCallResponse r;
        const Entry *entry = find(request.tool_name);
        if (!entry)
        {
            r.detail = "tool not found: " + request.tool_name;
            return r;
        }
        r.source_id = entry->source_id;

        const int n = entry->weights->n;
        if (!request.arguments.is_object() || !request.arguments.contains("h"))
        {
            r.detail = "invalid argument \"h\": required field missing";
            return r;
        }
        const auto &h = request.arguments["h"];
        if (!h.is_array())
        {
            r.detail = "invalid argument \"h\": expected an array of " + std::to_string(n) + " numbers";
            return r;
        }
        if (h.size() != static_cast<std::size_t>(n))
        {
            r.detail = "invalid argument \"h\": expected " + std::to_string(n) + " numbers, got " +
                       std::to_string(h.size());
            return r;
        }
        std::vector<double> features;
        features.reserve(h.size());
        for (const auto &v : h)
        {
            if (!v.is_number() || !std::isfinite(v.get<double>()))
            {
                r.detail = "invalid argument \"h\": entries must be finite numbers";
                return r;
            }
            features.push_back(v.get<double>());
        }
        r.status = Status::ok;
        r.confidence = expert::forward(*entry->weights, features);
        return r;
    }
}
