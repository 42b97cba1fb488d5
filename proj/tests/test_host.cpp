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

#include "fixtures.hpp"
#include "support.hpp"

#include "iox/host.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <mutex>

using namespace iox::host;
using iox::ErrorKind;
using iox::mcp::Status;
using iox::mcp::ToolCallRequest;
using test_support::kind_of;

namespace
{
    // Returns preset answers per tool and records every call.
    class ScriptedTransport final : public iox::mcp::ToolTransport
    {
    public:
        std::map<std::string, ToolCallResponse> answers;
        std::set<std::string> broken; // raise a transport error
        std::vector<ToolCallRequest> seen;

        std::vector<ExpertRegistration> list_tools() override
        {
            std::vector<ExpertRegistration> out;
            for (const auto &[name, r] : answers)
                out.push_back({name, iox::mcp::default_description(name), iox::mcp::make_input_schema(4)});
            return out;
        }

        ToolCallResponse call(const ToolCallRequest &request) override
        {
            std::lock_guard lock(*mutex_);
            seen.push_back(request);
            if (broken.contains(request.tool_name))
                iox::fail(ErrorKind::transport, "connection refused");
            const auto it = answers.find(request.tool_name);
            if (it == answers.end())
                return {Status::error, 0.0, 0, "tool not found: " + request.tool_name};
            return it->second;
        }

    private:
        std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
    };

    LlmConfig endpoint(std::string url)
    {
        LlmConfig c;
        c.url = std::move(url);
        return c;
    }

    AgentPolicy llm_policy(PlannerKind planner)
    {
        AgentPolicy p;
        p.planner = planner;
        p.reasoner = ReasonerKind::llm;
        p.llm = endpoint("http://x:1/");
        return p;
    }

    ToolCallResponse ok(double p, int id) { return {Status::ok, p, id, ""}; }

    ScriptedTransport four_experts()
    {
        ScriptedTransport t;
        t.answers["detect_los"] = ok(0.9, 1);
        t.answers["detect_high_doppler"] = ok(0.5, 2);
        t.answers["detect_rayleigh"] = ok(0.2, 3);
        t.answers["detect_rician_k10"] = ok(0.49999, 4);
        return t;
    }

    const std::vector<double> kH = {0.5, 1.25, 2.0, 0.125};
    const std::vector<std::string> kAll = {"detect_los", "detect_high_doppler", "detect_rayleigh",
                                           "detect_rician_k10"};
}

TEST_CASE("host - prompt template expansion")
{
    const Query q{"", {"detect_los", "detect_high_doppler", "detect_rician_k10"}};
    const std::string expected =
        "You are a wireless environment reasoning assistant. Given a real-valued channel vector h, infer whether the "
        "scene satisfies each of the following attributes: line-of-sight, high Doppler, Rician fading with K = 10. "
        "Respond only in strict JSON format: {\"line-of-sight\": 0 or 1, \"highdoppler\": 0 or 1, \"rician_m10\": 0 "
        "or 1}\n";
    CHECK(augment_context(q, {}, default_aliases()) == expected);

    const ExpertResults results = {{"detect_los", ok(0.75, 1)},
                                   {"detect_rician_k10", {Status::error, 0.0, 4, "invalid argument \"h\""}}};
    const Query with_text{"Is this scene LoS?", q.requested_attributes};
    CHECK(augment_context(with_text, results, default_aliases(), std::span<const double>(kH)) ==
          expected + "User query: Is this scene LoS?\nh = [0.5, 1.25, 2, 0.125]\n"
                     "expert detect_los (source_id 1): confidence 0.75\n"
                     "expert detect_rician_k10 (source_id 4): ERROR invalid argument \"h\"\n");

    CHECK(attribute_list({"detect_custom"}, default_aliases()) == "detect_custom");
    CHECK(attribute_json({"detect_custom", "detect_rayleigh"}, default_aliases()) ==
          "{\"detect_custom\": 0 or 1, \"rayleigh\": 0 or 1}");
}

TEST_CASE("host - deterministic plan")
{
    const auto listing = four_experts().list_tools();
    const auto plan = plan_deterministic({"", {"detect_rayleigh", "detect_los"}}, listing);
    CHECK(plan.mcp_calls == std::vector<std::string>{"detect_rayleigh", "detect_los"});
    CHECK_FALSE(plan.fallback);

    CHECK(kind_of([&] { plan_deterministic({"", {"detect_snow"}}, listing); }) == ErrorKind::unsatisfiable_plan);
    CHECK(kind_of([&] { plan_deterministic({"", {"detect_los"}}, {}); }) == ErrorKind::unsatisfiable_plan);
    CHECK(kind_of([&] { plan_deterministic({"", {}}, listing); }) == ErrorKind::parameter);
    CHECK(kind_of([&] { plan_deterministic({"", {"detect_los", "detect_los"}}, listing); }) ==
          ErrorKind::parameter);

    const auto loose = plan_deterministic({"", {"detect_snow", "detect_los"}}, listing, true);
    CHECK(loose.mcp_calls == std::vector<std::string>{"detect_los"});
    REQUIRE(loose.notes.size() == 1);
    CHECK(loose.notes[0] == "no registered expert for detect_snow");
}

TEST_CASE("host - LLM planner replies")
{
    const auto listing = four_experts().list_tools();
    const Query q{"what is the fading?", {"detect_rayleigh", "detect_los"}};
    std::string seen_prompt;
    auto reply_with = [&](std::string reply) {
        return FunctionLlmBackend([&seen_prompt, reply](const std::string &p) {
            seen_prompt = p;
            return reply;
        });
    };

    auto chatty = reply_with("Sure! Here you go: {\"mcp_calls\": [\"detect_rayleigh\", \"detect_snow\", "
                             "\"detect_rayleigh\"]} Hope that helps.");
    const auto plan = plan_llm(q, listing, chatty);
    CHECK(plan.mcp_calls == std::vector<std::string>{"detect_rayleigh"});
    CHECK_FALSE(plan.fallback);
    CHECK(plan.notes == std::vector<std::string>{"filtered unregistered tool detect_snow",
                                                 "dropped duplicate tool detect_rayleigh"});
    CHECK(seen_prompt.find("- detect_los: ") != std::string::npos);
    CHECK(seen_prompt.find("Query: what is the fading?") != std::string::npos);

    auto bare = reply_with("\"mcp_calls\": [\"detect_los\"]");
    CHECK(plan_llm(q, listing, bare).mcp_calls == std::vector<std::string>{"detect_los"});

    auto empty = reply_with("{\"mcp_calls\": []}");
    const auto none = plan_llm(q, listing, empty);
    CHECK(none.mcp_calls.empty());
    CHECK_FALSE(none.fallback);

    for (const std::string garbage : {"I cannot help with that.", "{\"mcp_calls\": \"detect_los\"}",
                                      "{\"mcp_calls\": [1, 2]}", "{\"mcp_calls\": [\"detect_los\""})
    {
        auto bad = reply_with(garbage);
        const auto fb = plan_llm(q, listing, bad);
        CHECK(fb.fallback);
        CHECK(fb.mcp_calls == std::vector<std::string>{"detect_rayleigh", "detect_los"});
    }
}

TEST_CASE("host - invoking experts")
{
    auto t = four_experts();
    t.answers["detect_rayleigh"] = {Status::error, 0.0, 3, "invalid argument \"h\""};
    Plan plan;
    plan.mcp_calls = kAll;
    for (const bool parallel : {false, true})
    {
        t.seen.clear();
        const auto results = invoke_all(plan, kH, t, parallel);
        REQUIRE(results.size() == 4);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(results[i].first == kAll[i]);
        CHECK(results[2].second.detail == "invalid argument \"h\"");
        CHECK(t.seen.size() == 4);
        CHECK(t.seen[0].arguments["h"] == kH);
    }
    t.broken.insert("detect_high_doppler");
    const auto msg = test_support::message_of([&] { invoke_all(plan, kH, t); });
    CHECK(msg.find("detect_high_doppler") != std::string::npos);
    CHECK(kind_of([&] { invoke_all(plan, kH, t, true); }) == ErrorKind::pipeline);
}

TEST_CASE("host - threshold reasoner")
{
    const ExpertResults results = {{"detect_los", ok(0.5, 1)},
                                   {"detect_rayleigh", ok(0.4999, 3)},
                                   {"detect_high_doppler", {Status::error, 0.0, 2, "boom"}}};
    const auto v = reason_threshold(results, {"detect_los", "detect_rayleigh", "detect_high_doppler",
                                              "detect_rician_k10"}, 0.5);
    CHECK(v.values == std::map<std::string, int>{{"detect_los", 1}, {"detect_rayleigh", 0},
                                                 {"detect_high_doppler", 0}, {"detect_rician_k10", 0}});
    CHECK(v.diagnostics == std::vector<std::string>{"detect_high_doppler: expert returned ERROR: boom",
                                                    "detect_rician_k10: no expert result"});
    CHECK(reason_threshold(results, {"detect_los"}, 0.0).values.at("detect_los") == 1);
    CHECK(reason_threshold({{"detect_los", ok(0.0, 1)}}, {"detect_los"}, 0.0).values.at("detect_los") == 1);
    CHECK(reason_threshold({{"detect_los", ok(0.99, 1)}}, {"detect_los"}, 1.0).values.at("detect_los") == 0);
}

TEST_CASE("host - LLM verdict parsing")
{
    const std::vector<std::string> req = {"detect_los", "detect_rician_k10"};
    const auto aliases = default_aliases();
    auto v = parse_llm_verdict("Answer: {\"line-of-sight\": 1, \"rician_m10\": false}", req, aliases);
    CHECK(v.values == std::map<std::string, int>{{"detect_los", 1}, {"detect_rician_k10", 0}});
    v = parse_llm_verdict("{\"detect_los\": true, \"detect_rician_k10\": 1, \"extra\": 7}", req, aliases);
    CHECK(v.values == std::map<std::string, int>{{"detect_los", 1}, {"detect_rician_k10", 1}});
    v = parse_llm_verdict("{not json} {\"line-of-sight\": 0, \"rician_m10\": 0}", req, aliases);
    CHECK(v.values.at("detect_los") == 0);

    for (const std::string bad : {"no json here", "{\"line-of-sight\": 1}", "{\"line-of-sight\": 2, \"rician_m10\": 0}",
                                  "{\"line-of-sight\": \"1\", \"rician_m10\": 0}",
                                  "{\"line-of-sight\": 0.5, \"rician_m10\": 0}", "{\"line-of-sight\": 1,"})
    {
        CHECK(kind_of([&] { parse_llm_verdict(bad, req, aliases); }) == ErrorKind::parse_failure);
        try
        {
            parse_llm_verdict(bad, req, aliases);
        }
        catch (const LlmParseFailure &e)
        {
            CHECK(e.raw_reply() == bad);
        }
    }
}

TEST_CASE("host - policy validation")
{
    AgentPolicy p;
    CHECK_NOTHROW(p.validate());
    p.reasoner = ReasonerKind::llm;
    CHECK(kind_of([&] { p.validate(); }) == ErrorKind::usage);
    p.llm = endpoint("http://127.0.0.1:9/complete");
    CHECK_NOTHROW(p.validate());
    p.threshold = 1.5;
    CHECK(kind_of([&] { p.validate(); }) == ErrorKind::usage);
    CHECK(kind_of([] { HttpLlmBackend(endpoint("https://example.invalid/v1")); }) == ErrorKind::usage);
    CHECK(kind_of([] { HttpLlmBackend(endpoint("http://:80/x")); }) == ErrorKind::usage);

    auto t = four_experts();
    AgentPolicy needs;
    needs.planner = PlannerKind::llm;
    CHECK(kind_of([&] { Agent(needs, t, default_aliases()); }) == ErrorKind::usage);

    auto cfg = endpoint("http://127.0.0.1:1/complete");
    cfg.timeout = std::chrono::milliseconds(300);
    HttpLlmBackend unreachable(cfg);
    CHECK(kind_of([&] { unreachable.complete("hi"); }) == ErrorKind::transport);
}

TEST_CASE("host - agent run and trace")
{
    auto t = four_experts();
    const Query q{"describe the scene", kAll};
    const auto run = run_agent(AgentPolicy{}, q, kH, t, default_aliases());
    CHECK(run.verdict.values == std::map<std::string, int>{{"detect_los", 1}, {"detect_high_doppler", 1},
                                                           {"detect_rayleigh", 0}, {"detect_rician_k10", 0}});
    CHECK(run.verdict.diagnostics.empty());
    const auto &tr = run.trace;
    CHECK(tr["policy"]["planner"] == "deterministic");
    CHECK(tr["plan"]["mcp_calls"] == kAll);
    REQUIRE(tr["calls"].size() == 4);
    CHECK(tr["calls"][0]["request"]["tool_name"] == "detect_los");
    CHECK(tr["calls"][0]["request"]["arguments"]["h"] == kH);
    CHECK(tr["calls"][0]["response"]["confidence"] == 0.9);
    CHECK(tr["h"] == kH);
    CHECK(tr["prompt"].get<std::string>().find("expert detect_rayleigh (source_id 3): confidence 0.2\n") !=
          std::string::npos);
    CHECK(tr["verdict"]["detect_los"] == 1);
    CHECK(replay_trace(tr).values == run.verdict.values);
    CHECK(replay_trace(json::parse(tr.dump())).values == run.verdict.values);
    CHECK(kind_of([] { replay_trace(json{{"calls", 3}}); }) == ErrorKind::format);

    auto missing = t;
    missing.answers.erase("detect_rayleigh");
    CHECK(kind_of([&] { run_agent(AgentPolicy{}, q, kH, missing, default_aliases()); }) ==
          ErrorKind::unsatisfiable_plan);
    AgentPolicy loose;
    loose.permissive = true;
    const auto partial = run_agent(loose, q, kH, missing, default_aliases());
    CHECK(partial.verdict.values.at("detect_rayleigh") == 0);
    CHECK(partial.trace["diagnostics"].size() == 2);
}

TEST_CASE("host - LLM planner and reasoner end to end")
{
    auto t = four_experts();
    std::vector<std::string> prompts;
    FunctionLlmBackend llm([&](const std::string &p) -> std::string {
        prompts.push_back(p);
        if (prompts.size() == 1)
            return R"({"mcp_calls": ["detect_los"]})";
        return R"(Verdict: {"line-of-sight": 0, "rayleigh": 1})";
    });
    const auto p = llm_policy(PlannerKind::llm);
    const auto run = run_agent(p, {"", {"detect_los", "detect_rayleigh"}}, kH, t, default_aliases(), &llm);
    CHECK(t.seen.size() == 1);
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1] == run.trace["prompt"]);
    CHECK(prompts[1].find("expert detect_los (source_id 1): confidence 0.9\n") != std::string::npos);
    CHECK(run.verdict.values == std::map<std::string, int>{{"detect_los", 0}, {"detect_rayleigh", 1}});
    CHECK(run.trace["llm_reply"] == R"(Verdict: {"line-of-sight": 0, "rayleigh": 1})");
    CHECK(replay_trace(run.trace).values == run.verdict.values);
}

TEST_CASE("host - raw policy never touches the tools")
{
    auto t = four_experts();
    FunctionLlmBackend llm([](const std::string &p) -> std::string {
        CHECK(p.find("h = [0.5, 1.25, 2, 0.125]") != std::string::npos);
        CHECK(p.find("expert ") == std::string::npos);
        return R"({"line-of-sight": 1})";
    });
    const auto p = llm_policy(PlannerKind::none);
    const auto run = run_agent(p, {"", {"detect_los"}}, kH, t, default_aliases(), &llm);
    CHECK(t.seen.empty());
    CHECK(run.verdict.values.at("detect_los") == 1);
    CHECK(run.trace["calls"].empty());
}

TEST_CASE("host - agent over real experts matches direct forward passes")
{
    const auto reg = fixture::registry();
    iox::mcp::InProcessTransport t(reg);
    std::mt19937_64 gen(12);
    for (int i = 0; i < 20; ++i)
    {
        const auto h = fixture::random_h(gen);
        const auto run = run_agent(AgentPolicy{}, {"", kAll}, h, t, default_aliases());
        for (std::size_t k = 0; k < kAll.size(); ++k)
        {
            const double p = iox::expert::forward(fixture::weights_for(k), h);
            CHECK(run.verdict.values.at(kAll[k]) == (p >= 0.5 ? 1 : 0));
        }
    }
}
