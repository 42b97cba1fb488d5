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

#include "iox/channel_sim.hpp"
#include "iox/expert.hpp"
#include "iox/host.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace iox::eval
{
    using json = nlohmann::ordered_json;
    using channel::AttributeLabels;
    using host::AgentVerdict;

    struct SampleScore
    {
        std::map<std::string, int> per_attribute; // 1 on exact match
        double mean = 0.0;
    };

    // Exact-match score of one verdict; parameter error unless the key sets agree.
    SampleScore accuracy(const AgentVerdict &verdict, const AttributeLabels &truth);

    // Hand-written magnitude heuristics with no trained parameters. Unknown
    // attributes are answered 0.
    AgentVerdict baseline_naive(std::span<const double> h, const std::vector<std::string> &attribute_set);

    struct PolicySpec
    {
        enum class Kind
        {
            naive,
            agent,
        };

        std::string name;
        Kind kind = Kind::agent;
        host::AgentPolicy agent;

        bool uses_mcp() const { return kind == Kind::agent && agent.uses_tools(); }

        static PolicySpec naive_baseline();
        static PolicySpec mcp_threshold(double threshold = 0.5);
        static PolicySpec llm_raw(host::LlmConfig llm);
        static PolicySpec llm_mcp(host::LlmConfig llm);
    };

    struct ExperimentConfig
    {
        std::size_t sample_count = 1000;
        std::vector<std::string> attributes = channel::supported_attributes();
        channel::SceneSampler sampler;
        std::vector<PolicySpec> policies = {PolicySpec::mcp_threshold(), PolicySpec::naive_baseline()};
        std::uint64_t seed = 7;

        void validate() const;
    };

    struct AttributeCounts
    {
        std::size_t correct = 0;
        std::size_t wrong = 0;    // verdict produced and incorrect
        std::size_t failures = 0; // pipeline failure, scored 0

        std::size_t total() const { return correct + wrong + failures; }
        double accuracy() const { return total() ? static_cast<double>(correct) / total() : 0.0; }
        bool operator==(const AttributeCounts &) const = default;
    };

    struct PolicyReport
    {
        std::string name;
        bool uses_mcp = false;
        double average_accuracy = 0.0; // mean of per-sample means
        std::vector<std::pair<std::string, AttributeCounts>> attributes;
        std::vector<std::string> failure_log; // not serialized
        double runtime_seconds = 0.0;         // not serialized

        const AttributeCounts &counts(const std::string &attribute) const;
    };

    struct ExpertCurve
    {
        std::string attribute;
        expert::TrainHistory history;
    };

    struct Report
    {
        std::size_t sample_count = 0;
        std::uint64_t seed = 0;
        std::vector<std::string> attributes;
        std::vector<PolicyReport> policies;
        std::vector<ExpertCurve> curves;
        std::size_t smoothing_window = 50;

        const PolicyReport &policy(const std::string &name) const;
    };

    using LlmFactory = std::function<std::unique_ptr<host::LlmBackend>(const host::AgentPolicy &)>;
    using Logger = std::function<void(const std::string &)>;

    // HttpLlmBackend built from the policy's endpoint configuration.
    std::unique_ptr<host::LlmBackend> default_llm_factory(const host::AgentPolicy &policy);

    /// Samples the scenes once and scores every policy on them. Tool-using
    /// policies are checked against `transport` before any sampling.
    Report run_experiment(const ExperimentConfig &config, mcp::ToolTransport *transport,
                          const host::AliasTable &aliases = host::default_aliases(),
                          const LlmFactory &llm_factory = default_llm_factory, const Logger &log = {});

    enum class ReportFormat
    {
        table,
        csv,
        json,
    };

    ReportFormat parse_report_format(const std::string &name);
    std::string extension(ReportFormat format);

    std::string render_table(const Report &report);
    std::string render_csv(const Report &report);
    json report_to_json(const Report &report);

    void emit_report(const Report &report, ReportFormat format, const std::filesystem::path &path);

    // (policy, attribute) -> accuracy; attribute "average" holds the policy average.
    std::map<std::pair<std::string, std::string>, double> parse_report_csv(const std::string &text);

    // Empty when `doc` follows the report layout and its invariants; otherwise
    // one message per violation.
    std::vector<std::string> validate_report_json(const json &doc);
}
