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

#include "iox/error.hpp"
#include "iox/mcp/client.hpp"
#include "iox/mcp/manifest.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

/// The agent host: plan which experts to consult, call them over the tool
/// layer, fold their answers into the prompt, and produce a binary verdict
/// per requested attribute.
namespace iox::host
{
    using mcp::AliasTable;
    using mcp::ExpertRegistration;
    using mcp::ToolCallResponse;
    using json = nlohmann::ordered_json;

    struct Query
    {
        std::string text;
        std::vector<std::string> requested_attributes;

        // Parameter error when no attributes are requested or one repeats.
        void validate() const;
    };

    struct Plan
    {
        std::vector<std::string> mcp_calls;
        bool fallback = false;          // LLM planner reply was unusable
        std::vector<std::string> notes; // skipped or filtered names
    };

    using ExpertResults = std::vector<std::pair<std::string, ToolCallResponse>>;

    struct AgentVerdict
    {
        std::map<std::string, int> values;
        std::vector<std::string> diagnostics;
    };

    enum class PlannerKind
    {
        deterministic,
        llm,
        none, // no tool access; the reasoner sees only the raw channel vector
    };

    enum class ReasonerKind
    {
        threshold,
        llm,
    };

    struct LlmConfig
    {
        std::string url;     // http://host:port/path, plain text in and out
        std::string model;   // sent as X-Model
        std::string api_key; // sent as a bearer token when non-empty
        std::chrono::milliseconds timeout{60000};

        // IOX_LLM_URL, IOX_LLM_MODEL, IOX_LLM_API_KEY; nullopt when no URL is set.
        static std::optional<LlmConfig> from_env();
    };

    struct AgentPolicy
    {
        PlannerKind planner = PlannerKind::deterministic;
        ReasonerKind reasoner = ReasonerKind::threshold;
        double threshold = 0.5;
        std::optional<LlmConfig> llm;
        bool permissive = false; // skip unregistered attributes instead of failing the plan
        bool parallel_calls = false;

        // Usage error when an LLM stage has no endpoint configuration.
        void validate() const;
        bool uses_tools() const { return planner != PlannerKind::none; }
    };

    std::string_view to_string(PlannerKind kind);
    std::string_view to_string(ReasonerKind kind);

    /// Text-in/text-out language model.
    class LlmBackend
    {
    public:
        virtual ~LlmBackend() = default;
        virtual std::string complete(const std::string &prompt) = 0;
    };

    class HttpLlmBackend final : public LlmBackend
    {
    public:
        explicit HttpLlmBackend(LlmConfig config);
        std::string complete(const std::string &prompt) override;

    private:
        LlmConfig config_;
        std::string host_;
        int port_ = 80;
        std::string path_ = "/";
    };

    class FunctionLlmBackend final : public LlmBackend
    {
    public:
        explicit FunctionLlmBackend(std::function<std::string(const std::string &)> fn) : fn_(std::move(fn)) {}
        std::string complete(const std::string &prompt) override { return fn_(prompt); }

    private:
        std::function<std::string(const std::string &)> fn_;
    };

    // Reply extraction failed; the raw reply is kept for the trace.
    class LlmParseFailure : public Error
    {
    public:
        LlmParseFailure(const std::string &message, std::string raw_reply)
            : Error(ErrorKind::parse_failure, message), raw_reply_(std::move(raw_reply)) {}

        const std::string &raw_reply() const noexcept { return raw_reply_; }

    private:
        std::string raw_reply_;
    };

    // Display names and answer keys for the four built-in attributes.
    AliasTable default_aliases();

    Plan plan_deterministic(const Query &query, const std::vector<ExpertRegistration> &listing,
                            bool permissive = false);

    std::string planner_prompt(const Query &query, const std::vector<ExpertRegistration> &listing);

    // Falls back to plan_deterministic (permissive) when the reply carries no
    // usable "mcp_calls" list.
    Plan plan_llm(const Query &query, const std::vector<ExpertRegistration> &listing, LlmBackend &llm);

    // One call per planned tool, in plan order. ERROR results are stored; a
    // transport failure raises a pipeline error naming the tool.
    ExpertResults invoke_all(const Plan &plan, std::span<const double> h, mcp::ToolTransport &transport,
                             bool parallel = false);

    // Prompt template with attribute_list / attribute_json expanded, followed by
    // the optional query text, the optional channel vector and one line per
    // expert result.
    std::string augment_context(const Query &query, const ExpertResults &results, const AliasTable &aliases,
                                std::optional<std::span<const double>> h = std::nullopt);

    std::string attribute_list(const std::vector<std::string> &attributes, const AliasTable &aliases);
    std::string attribute_json(const std::vector<std::string> &attributes, const AliasTable &aliases);

    // verdict[a] = 1 iff an OK result for a has confidence >= threshold.
    AgentVerdict reason_threshold(const ExpertResults &results, const std::vector<std::string> &requested,
                                  double threshold);

    // Parses the first well-formed JSON object in the reply. Keys may be the
    // alias answer keys or the attribute ids; values 0/1 or true/false.
    AgentVerdict parse_llm_verdict(const std::string &reply, const std::vector<std::string> &requested,
                                   const AliasTable &aliases);

    AgentVerdict reason_llm(const std::string &prompt, const std::vector<std::string> &requested,
                            const AliasTable &aliases, LlmBackend &llm);

    struct AgentRun
    {
        AgentVerdict verdict;
        json trace;
    };

    /// Runs planning through final reasoning for one query. Holds only
    /// references; one Agent answers one query at a time.
    class Agent
    {
    public:
        Agent(AgentPolicy policy, mcp::ToolTransport &transport, AliasTable aliases, LlmBackend *llm = nullptr);

        AgentRun run(const Query &query, std::span<const double> h);

        const std::vector<ExpertRegistration> &listing();

    private:
        AgentPolicy policy_;
        mcp::ToolTransport &transport_;
        AliasTable aliases_;
        LlmBackend *llm_;
        std::optional<std::vector<ExpertRegistration>> listing_;
    };

    AgentRun run_agent(const AgentPolicy &policy, const Query &query, std::span<const double> h,
                       mcp::ToolTransport &transport, const AliasTable &aliases, LlmBackend *llm = nullptr);

    // Rebuilds the threshold verdict from a trace's recorded responses.
    AgentVerdict replay_trace(const json &trace);
}
