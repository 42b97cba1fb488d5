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

#include "iox/host.hpp"

#include "iox/channel_sim.hpp"
#include "iox/format.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <future>
#include <regex>
#include <set>

namespace iox::host
{
    namespace
    {
        constexpr const char *kTemplateHead =
            "You are a wireless environment reasoning assistant. Given a real-valued channel vector h, infer whether "
            "the scene satisfies each of the following attributes: ";
        constexpr const char *kTemplateMid = ". Respond only in strict JSON format: ";

        const mcp::AttributeAlias &alias_for(const std::string &id, const AliasTable &aliases,
                                             mcp::AttributeAlias &scratch)
        {
            if (const auto it = aliases.find(id); it != aliases.end())
                return it->second;
            scratch = {id, id};
            return scratch;
        }

        // End index (exclusive) of the balanced {...} starting at `start`, or npos.
        std::size_t match_object(const std::string &text, std::size_t start)
        {
            int depth = 0;
            bool in_string = false, escaped = false;
            for (std::size_t i = start; i < text.size(); ++i)
            {
                const char c = text[i];
                if (in_string)
                {
                    if (escaped)
                        escaped = false;
                    else if (c == '\\')
                        escaped = true;
                    else if (c == '"')
                        in_string = false;
                    continue;
                }
                if (c == '"')
                    in_string = true;
                else if (c == '{')
                    ++depth;
                else if (c == '}' && --depth == 0)
                    return i + 1;
            }
            return std::string::npos;
        }

        std::optional<json> first_object(const std::string &text,
                                         const std::function<bool(const json &)> &accept = {})
        {
            for (std::size_t pos = text.find('{'); pos != std::string::npos; pos = text.find('{', pos + 1))
            {
                const std::size_t end = match_object(text, pos);
                if (end == std::string::npos)
                    continue;
                try
                {
                    json doc = json::parse(text.substr(pos, end - pos));
                    if (doc.is_object() && (!accept || accept(doc)))
                        return doc;
                }
                catch (const json::parse_error &)
                {
                }
            }
            return std::nullopt;
        }

        std::optional<std::vector<std::string>> string_list(const json &value)
        {
            if (!value.is_array())
                return std::nullopt;
            std::vector<std::string> out;
            for (const auto &v : value)
            {
                if (!v.is_string())
                    return std::nullopt;
                out.push_back(v.get<std::string>());
            }
            return out;
        }

        std::optional<std::vector<std::string>> extract_mcp_calls(const std::string &reply)
        {
            if (auto doc = first_object(reply, [](const json &d) { return d.contains("mcp_calls"); }))
                if (auto list = string_list((*doc)["mcp_calls"]))
                    return list;
            // Bare `"mcp_calls": [...]` without an enclosing object.
            static const std::regex bare(R"re("mcp_calls"\s*:\s*(\[[^\]]*\]))re");
            std::smatch m;
            if (std::regex_search(reply, m, bare))
            {
                try
                {
                    return string_list(json::parse(m[1].str()));
                }
                catch (const json::parse_error &)
                {
                }
            }
            return std::nullopt;
        }

        std::string format_vector(std::span<const double> h)
        {
            std::string out = "[";
            for (std::size_t i = 0; i < h.size(); ++i)
            {
                if (i)
                    out += ", ";
                out += format_double(h[i]);
            }
            return out + "]";
        }
    }

    void Query::validate() const
    {
        if (requested_attributes.empty())
            fail(ErrorKind::parameter, "query must request at least one attribute");
        std::set<std::string> seen;
        for (const auto &a : requested_attributes)
            if (!seen.insert(a).second)
                fail(ErrorKind::parameter, "attribute requested twice: " + a);
    }

    std::optional<LlmConfig> LlmConfig::from_env()
    {
        const char *url = std::getenv("IOX_LLM_URL");
        if (!url || !*url)
            return std::nullopt;
        LlmConfig c;
        c.url = url;
        if (const char *model = std::getenv("IOX_LLM_MODEL"))
            c.model = model;
        if (const char *key = std::getenv("IOX_LLM_API_KEY"))
            c.api_key = key;
        return c;
    }

    void AgentPolicy::validate() const
    {
        const bool needs_llm = planner == PlannerKind::llm || reasoner == ReasonerKind::llm;
        if (needs_llm && (!llm || llm->url.empty()))
            fail(ErrorKind::usage, "LLM planner/reasoner needs an endpoint (set IOX_LLM_URL or --llm-url)");
        if (!(threshold >= 0.0 && threshold <= 1.0))
            fail(ErrorKind::usage, "threshold must be in [0, 1]");
    }

    std::string_view to_string(PlannerKind kind)
    {
        switch (kind)
        {
        case PlannerKind::deterministic: return "deterministic";
        case PlannerKind::llm: return "llm";
        case PlannerKind::none: return "none";
        }
        return "unknown";
    }

    std::string_view to_string(ReasonerKind kind)
    {
        return kind == ReasonerKind::threshold ? "threshold" : "llm";
    }

    HttpLlmBackend::HttpLlmBackend(LlmConfig config) : config_(std::move(config))
    {
        std::string rest = config_.url;
        if (rest.rfind("http://", 0) == 0)
            rest = rest.substr(7);
        else if (rest.find("://") != std::string::npos)
            fail(ErrorKind::usage, "only http:// LLM endpoints are supported: " + config_.url);
        if (const auto slash = rest.find('/'); slash != std::string::npos)
        {
            path_ = rest.substr(slash);
            rest = rest.substr(0, slash);
        }
        host_ = rest;
        if (const auto colon = rest.rfind(':'); colon != std::string::npos)
        {
            host_ = rest.substr(0, colon);
            try
            {
                port_ = std::stoi(rest.substr(colon + 1));
            }
            catch (const std::exception &)
            {
                fail(ErrorKind::usage, "malformed LLM endpoint: " + config_.url);
            }
        }
        if (host_.empty())
            fail(ErrorKind::usage, "malformed LLM endpoint: " + config_.url);
    }

    std::string HttpLlmBackend::complete(const std::string &prompt)
    {
        httplib::Client cli(host_, port_);
        cli.set_connection_timeout(config_.timeout);
        cli.set_read_timeout(config_.timeout);
        httplib::Headers headers;
        if (!config_.model.empty())
            headers.emplace("X-Model", config_.model);
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        auto res = cli.Post(path_, headers, prompt, "text/plain");
        if (!res)
            fail(ErrorKind::transport, "LLM endpoint " + config_.url + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            fail(ErrorKind::transport, "LLM endpoint " + config_.url + ": HTTP status " + std::to_string(res->status));
        return res->body;
    }

    AliasTable default_aliases()
    {
        return {
            {std::string(channel::kDetectLos), {"line-of-sight", "line-of-sight"}},
            {std::string(channel::kDetectHighDoppler), {"high Doppler", "highdoppler"}},
            {std::string(channel::kDetectRicianK10), {"Rician fading with K = 10", "rician_m10"}},
            {std::string(channel::kDetectRayleigh), {"Rayleigh fading", "rayleigh"}},
        };
    }

    Plan plan_deterministic(const Query &query, const std::vector<ExpertRegistration> &listing, bool permissive)
    {
        query.validate();
        if (listing.empty() && !permissive)
            fail(ErrorKind::unsatisfiable_plan, "no experts are registered");
        Plan plan;
        for (const auto &attr : query.requested_attributes)
        {
            const bool registered = std::any_of(listing.begin(), listing.end(),
                                                [&](const ExpertRegistration &r) { return r.name == attr; });
            if (registered)
                plan.mcp_calls.push_back(attr);
            else if (permissive)
                plan.notes.push_back("no registered expert for " + attr);
            else
                fail(ErrorKind::unsatisfiable_plan, "no registered expert for requested attribute " + attr);
        }
        return plan;
    }

    std::string planner_prompt(const Query &query, const std::vector<ExpertRegistration> &listing)
    {
        std::string p = "Which experts are relevant?\nAvailable experts:\n";
        for (const auto &r : listing)
            p += "- " + r.name + ": " + r.description + "\n";
        if (!query.text.empty())
            p += "Query: " + query.text + "\n";
        p += "Requested attributes:";
        for (const auto &a : query.requested_attributes)
            p += " " + a;
        p += "\nReply with JSON only: {\"mcp_calls\": [expert names]}";
        return p;
    }

    Plan plan_llm(const Query &query, const std::vector<ExpertRegistration> &listing, LlmBackend &llm)
    {
        query.validate();
        const std::string reply = llm.complete(planner_prompt(query, listing));
        const auto calls = extract_mcp_calls(reply);
        if (!calls)
        {
            Plan plan = plan_deterministic(query, listing, true);
            plan.fallback = true;
            plan.notes.push_back("planner reply had no parseable mcp_calls list; used deterministic plan");
            return plan;
        }
        Plan plan;
        for (const auto &name : *calls)
        {
            const bool registered = std::any_of(listing.begin(), listing.end(),
                                                [&](const ExpertRegistration &r) { return r.name == name; });
            if (!registered)
                plan.notes.push_back("filtered unregistered tool " + name);
            else if (std::find(plan.mcp_calls.begin(), plan.mcp_calls.end(), name) != plan.mcp_calls.end())
                plan.notes.push_back("dropped duplicate tool " + name);
            else
                plan.mcp_calls.push_back(name);
        }
        return plan;
    }

    ExpertResults invoke_all(const Plan &plan, std::span<const double> h, mcp::ToolTransport &transport,
                             bool parallel)
    {
        ExpertResults results;
        results.reserve(plan.mcp_calls.size());
        auto call_one = [&](const std::string &tool) {
            try
            {
                return transport.call_expert(tool, h);
            }
            catch (const Error &e)
            {
                fail(ErrorKind::pipeline, "expert " + tool + ": " + std::string(to_string(e.kind())) + " error: " +
                                              e.what());
            }
        };
        if (!parallel || plan.mcp_calls.size() < 2)
        {
            for (const auto &tool : plan.mcp_calls)
                results.emplace_back(tool, call_one(tool));
            return results;
        }
        std::vector<std::future<ToolCallResponse>> pending;
        for (const auto &tool : plan.mcp_calls)
            pending.push_back(std::async(std::launch::async, call_one, tool));
        for (std::size_t i = 0; i < pending.size(); ++i)
            results.emplace_back(plan.mcp_calls[i], pending[i].get());
        return results;
    }

    std::string attribute_list(const std::vector<std::string> &attributes, const AliasTable &aliases)
    {
        std::string out;
        mcp::AttributeAlias scratch;
        for (std::size_t i = 0; i < attributes.size(); ++i)
        {
            if (i)
                out += ", ";
            out += alias_for(attributes[i], aliases, scratch).display;
        }
        return out;
    }

    std::string attribute_json(const std::vector<std::string> &attributes, const AliasTable &aliases)
    {
        std::string out = "{";
        mcp::AttributeAlias scratch;
        for (std::size_t i = 0; i < attributes.size(); ++i)
        {
            if (i)
                out += ", ";
            out += json(alias_for(attributes[i], aliases, scratch).key).dump() + ": 0 or 1";
        }
        return out + "}";
    }

    std::string augment_context(const Query &query, const ExpertResults &results, const AliasTable &aliases,
                                std::optional<std::span<const double>> h)
    {
        std::string p = kTemplateHead + attribute_list(query.requested_attributes, aliases) + kTemplateMid +
                        attribute_json(query.requested_attributes, aliases) + "\n";
        if (!query.text.empty())
            p += "User query: " + query.text + "\n";
        if (h)
            p += "h = " + format_vector(*h) + "\n";
        for (const auto &[tool, r] : results)
        {
            p += "expert " + tool + " (source_id " + std::to_string(r.source_id) + "): ";
            p += r.ok() ? "confidence " + format_double(r.confidence) : "ERROR " + r.detail;
            p += "\n";
        }
        return p;
    }

    AgentVerdict reason_threshold(const ExpertResults &results, const std::vector<std::string> &requested,
                                  double threshold)
    {
        AgentVerdict v;
        for (const auto &attr : requested)
        {
            const auto it = std::find_if(results.begin(), results.end(),
                                         [&](const auto &entry) { return entry.first == attr; });
            int value = 0;
            if (it == results.end())
                v.diagnostics.push_back(attr + ": no expert result");
            else if (!it->second.ok())
                v.diagnostics.push_back(attr + ": expert returned ERROR: " + it->second.detail);
            else
                value = it->second.confidence >= threshold ? 1 : 0;
            v.values[attr] = value;
        }
        return v;
    }

    AgentVerdict parse_llm_verdict(const std::string &reply, const std::vector<std::string> &requested,
                                   const AliasTable &aliases)
    {
        const auto doc = first_object(reply);
        if (!doc)
            throw LlmParseFailure("LLM reply contains no well-formed JSON object", reply);
        AgentVerdict v;
        mcp::AttributeAlias scratch;
        for (const auto &attr : requested)
        {
            const auto &alias = alias_for(attr, aliases, scratch);
            const json *value = nullptr;
            if (doc->contains(alias.key))
                value = &(*doc)[alias.key];
            else if (doc->contains(attr))
                value = &(*doc)[attr];
            if (!value)
                throw LlmParseFailure("LLM reply is missing key \"" + alias.key + "\"", reply);
            int bit;
            if (value->is_boolean())
                bit = value->get<bool>() ? 1 : 0;
            else if (value->is_number_integer() && (value->get<long long>() == 0 || value->get<long long>() == 1))
                bit = static_cast<int>(value->get<long long>());
            else
                throw LlmParseFailure("LLM reply value for \"" + alias.key + "\" is not 0 or 1", reply);
            v.values[attr] = bit;
        }
        return v;
    }

    AgentVerdict reason_llm(const std::string &prompt, const std::vector<std::string> &requested,
                            const AliasTable &aliases, LlmBackend &llm)
    {
        return parse_llm_verdict(llm.complete(prompt), requested, aliases);
    }

    Agent::Agent(AgentPolicy policy, mcp::ToolTransport &transport, AliasTable aliases, LlmBackend *llm)
        : policy_(std::move(policy)), transport_(transport), aliases_(std::move(aliases)), llm_(llm)
    {
        const bool needs_llm = policy_.planner == PlannerKind::llm || policy_.reasoner == ReasonerKind::llm;
        if (needs_llm && !llm_)
            fail(ErrorKind::usage, "policy needs an LLM backend");
    }

    const std::vector<ExpertRegistration> &Agent::listing()
    {
        if (!listing_)
            listing_ = transport_.list_tools();
        return *listing_;
    }

    AgentRun Agent::run(const Query &query, std::span<const double> h)
    {
        query.validate();
        AgentRun run;
        json &trace = run.trace;
        trace["policy"] = {{"planner", to_string(policy_.planner)},
                           {"reasoner", to_string(policy_.reasoner)},
                           {"threshold", policy_.threshold},
                           {"permissive", policy_.permissive}};
        trace["query"] = {{"text", query.text}, {"requested_attributes", query.requested_attributes}};
        trace["h"] = std::vector<double>(h.begin(), h.end());

        Plan plan;
        if (policy_.planner == PlannerKind::deterministic)
            plan = plan_deterministic(query, listing(), policy_.permissive);
        else if (policy_.planner == PlannerKind::llm)
            plan = plan_llm(query, listing(), *llm_);
        trace["plan"] = {{"mcp_calls", plan.mcp_calls}, {"fallback", plan.fallback}, {"notes", plan.notes}};

        const ExpertResults results = invoke_all(plan, h, transport_, policy_.parallel_calls);
        json calls = json::array();
        for (const auto &[tool, response] : results)
        {
            const auto request = mcp::ToolCallRequest::with_features(tool, h);
            calls.push_back({{"request", {{"tool_name", request.tool_name}, {"arguments", request.arguments}}},
                             {"response", mcp::to_json(response)}});
        }
        trace["calls"] = std::move(calls);

        const std::string prompt = augment_context(query, results, aliases_, h);
        trace["prompt"] = prompt;

        if (policy_.reasoner == ReasonerKind::threshold)
            run.verdict = reason_threshold(results, query.requested_attributes, policy_.threshold);
        else
        {
            const std::string reply = llm_->complete(prompt);
            trace["llm_reply"] = reply;
            run.verdict = parse_llm_verdict(reply, query.requested_attributes, aliases_);
        }
        for (const auto &note : plan.notes)
            run.verdict.diagnostics.push_back("plan: " + note);

        json verdict = json::object();
        for (const auto &attr : query.requested_attributes)
            verdict[attr] = run.verdict.values.at(attr);
        trace["verdict"] = std::move(verdict);
        trace["diagnostics"] = run.verdict.diagnostics;
        return run;
    }

    AgentRun run_agent(const AgentPolicy &policy, const Query &query, std::span<const double> h,
                       mcp::ToolTransport &transport, const AliasTable &aliases, LlmBackend *llm)
    {
        policy.validate();
        Agent agent(policy, transport, aliases, llm);
        return agent.run(query, h);
    }

    AgentVerdict replay_trace(const json &trace)
    {
        try
        {
            const auto requested = trace.at("query").at("requested_attributes").get<std::vector<std::string>>();
            const double threshold = trace.at("policy").at("threshold").get<double>();
            ExpertResults results;
            for (const auto &call : trace.at("calls"))
                results.emplace_back(call.at("request").at("tool_name").get<std::string>(),
                                     mcp::response_from_json(call.at("response")));
            if (trace.at("policy").at("reasoner") == "llm")
                return parse_llm_verdict(trace.at("llm_reply").get<std::string>(), requested, default_aliases());
            return reason_threshold(results, requested, threshold);
        }
        catch (const json::exception &e)
        {
            fail(ErrorKind::format, std::string("malformed trace: ") + e.what());
        }
    }
}
