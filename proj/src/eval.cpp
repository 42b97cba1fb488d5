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

#include "iox/eval.hpp"

#include "iox/format.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace iox::eval
{
    namespace
    {
        constexpr double kLosPeakRatio = 2.0;
        constexpr double kStaticCorrelation = 0.9;
        constexpr double kRayleighCvMin = 0.45;
        constexpr double kRayleighCvMax = 0.60;
        constexpr double kRicianK10CvMax = 0.25;

        constexpr const char *kCsvHeader = "record,name,attribute,epoch,metric,value";

        struct MagnitudeStats
        {
            double mean = 0.0;
            double max = 0.0;
            double cv = 0.0;
            double lag1 = 1.0;
        };

        MagnitudeStats magnitude_stats(std::span<const double> h)
        {
            MagnitudeStats s;
            if (h.empty())
                return s;
            double sum = 0.0;
            s.max = h[0];
            for (double v : h)
            {
                sum += v;
                s.max = std::max(s.max, v);
            }
            s.mean = sum / static_cast<double>(h.size());
            double var = 0.0, cross = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i)
            {
                const double d = h[i] - s.mean;
                var += d * d;
                if (i + 1 < h.size())
                    cross += d * (h[i + 1] - s.mean);
            }
            if (s.mean > 0.0)
                s.cv = std::sqrt(var / static_cast<double>(h.size())) / s.mean;
            // A flat sequence is perfectly self-similar.
            if (var > 0.0)
                s.lag1 = cross / var;
            return s;
        }

        std::string percent(double fraction)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
            return buf;
        }

        // Attributes whose planned expert call did not produce an OK response.
        std::set<std::string> failed_attributes(const json &trace)
        {
            std::set<std::string> failed;
            if (!trace.contains("plan"))
                return failed;
            for (const auto &tool : trace["plan"]["mcp_calls"])
                failed.insert(tool.get<std::string>());
            for (const auto &call : trace["calls"])
                if (call["response"]["status"] == "OK")
                    failed.erase(call["request"]["tool_name"].get<std::string>());
            return failed;
        }

        void check_policy_name(const std::string &name)
        {
            if (name.empty() || name.find_first_of(",\"\n\r") != std::string::npos)
                fail(ErrorKind::parameter, "policy name must be non-empty without commas, quotes or newlines: " +
                                               name);
        }
    }

    SampleScore accuracy(const AgentVerdict &verdict, const AttributeLabels &truth)
    {
        if (verdict.values.size() != truth.size())
            fail(ErrorKind::parameter, "verdict and truth cover different attributes");
        SampleScore score;
        int hits = 0;
        for (const auto &[attr, y] : truth)
        {
            const auto it = verdict.values.find(attr);
            if (it == verdict.values.end())
                fail(ErrorKind::parameter, "verdict has no value for " + attr);
            const int a = it->second == y ? 1 : 0;
            score.per_attribute[attr] = a;
            hits += a;
        }
        score.mean = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
        return score;
    }

    AgentVerdict baseline_naive(std::span<const double> h, const std::vector<std::string> &attribute_set)
    {
        const MagnitudeStats s = magnitude_stats(h);
        AgentVerdict v;
        for (const auto &attr : attribute_set)
        {
            int r = 0;
            if (attr == channel::kDetectLos)
                r = (s.mean > 0.0 ? s.max / s.mean : 1.0) < kLosPeakRatio;
            else if (attr == channel::kDetectHighDoppler)
                r = s.lag1 < kStaticCorrelation;
            else if (attr == channel::kDetectRayleigh)
                r = s.cv >= kRayleighCvMin && s.cv <= kRayleighCvMax;
            else if (attr == channel::kDetectRicianK10)
                r = s.cv < kRicianK10CvMax;
            v.values[attr] = r;
        }
        return v;
    }

    PolicySpec PolicySpec::naive_baseline()
    {
        return {"naive-baseline", Kind::naive, {}};
    }

    PolicySpec PolicySpec::mcp_threshold(double threshold)
    {
        host::AgentPolicy p;
        p.threshold = threshold;
        return {"mcp-threshold", Kind::agent, p};
    }

    PolicySpec PolicySpec::llm_raw(host::LlmConfig llm)
    {
        host::AgentPolicy p;
        p.planner = host::PlannerKind::none;
        p.reasoner = host::ReasonerKind::llm;
        p.llm = std::move(llm);
        return {"llm-raw", Kind::agent, p};
    }

    PolicySpec PolicySpec::llm_mcp(host::LlmConfig llm)
    {
        host::AgentPolicy p;
        p.planner = host::PlannerKind::llm;
        p.reasoner = host::ReasonerKind::llm;
        p.llm = std::move(llm);
        return {"llm-mcp", Kind::agent, p};
    }

    void ExperimentConfig::validate() const
    {
        if (sample_count < 1)
            fail(ErrorKind::parameter, "sample_count must be at least 1");
        if (policies.empty())
            fail(ErrorKind::parameter, "at least one policy is required");
        if (attributes.empty())
            fail(ErrorKind::parameter, "attribute set is empty");
        std::set<std::string> names;
        for (const auto &p : policies)
        {
            check_policy_name(p.name);
            if (!names.insert(p.name).second)
                fail(ErrorKind::parameter, "duplicate policy name " + p.name);
            if (p.kind == PolicySpec::Kind::agent)
                p.agent.validate();
        }
        std::set<std::string> attrs(attributes.begin(), attributes.end());
        if (attrs.size() != attributes.size())
            fail(ErrorKind::parameter, "attribute set has duplicates");
        if (attrs.count("average"))
            fail(ErrorKind::parameter, "\"average\" is reserved in reports");
    }

    const AttributeCounts &PolicyReport::counts(const std::string &attribute) const
    {
        for (const auto &[name, c] : attributes)
            if (name == attribute)
                return c;
        fail(ErrorKind::parameter, "report has no attribute " + attribute);
    }

    const PolicyReport &Report::policy(const std::string &name) const
    {
        for (const auto &p : policies)
            if (p.name == name)
                return p;
        fail(ErrorKind::parameter, "report has no policy " + name);
    }

    std::unique_ptr<host::LlmBackend> default_llm_factory(const host::AgentPolicy &policy)
    {
        if (!policy.llm)
            fail(ErrorKind::usage, "policy needs an LLM endpoint");
        return std::make_unique<host::HttpLlmBackend>(*policy.llm);
    }

    Report run_experiment(const ExperimentConfig &config, mcp::ToolTransport *transport,
                          const host::AliasTable &aliases, const LlmFactory &llm_factory, const Logger &log)
    {
        config.validate();
        auto say = [&](const std::string &msg) {
            if (log)
                log(msg);
        };

        // Setup: every tool-using policy needs a reachable, sufficient tool set.
        std::vector<std::unique_ptr<host::LlmBackend>> backends(config.policies.size());
        for (std::size_t p = 0; p < config.policies.size(); ++p)
        {
            const PolicySpec &spec = config.policies[p];
            if (spec.kind != PolicySpec::Kind::agent)
                continue;
            if (spec.agent.uses_tools())
            {
                if (!transport)
                    fail(ErrorKind::transport, "policy " + spec.name + " needs an expert server");
                std::vector<mcp::ExpertRegistration> listing;
                try
                {
                    listing = transport->list_tools();
                }
                catch (const Error &e)
                {
                    fail(ErrorKind::transport, "expert server unreachable: " + std::string(e.what()));
                }
                if (spec.agent.planner == host::PlannerKind::deterministic && !spec.agent.permissive)
                    host::plan_deterministic({"", config.attributes}, listing, false);
            }
            if (spec.agent.planner == host::PlannerKind::llm || spec.agent.reasoner == host::ReasonerKind::llm)
                backends[p] = llm_factory(spec.agent);
        }

        const auto specs = channel::sample_specs(config.sampler, config.sample_count, config.seed);
        std::vector<channel::Scene> scenes;
        scenes.reserve(specs.size());
        for (const auto &spec : specs)
            scenes.push_back(channel::synth_scene(spec, config.attributes));

        Report report;
        report.sample_count = config.sample_count;
        report.seed = config.seed;
        report.attributes = config.attributes;

        for (std::size_t p = 0; p < config.policies.size(); ++p)
        {
            const PolicySpec &spec = config.policies[p];
            PolicyReport pr;
            pr.name = spec.name;
            pr.uses_mcp = spec.uses_mcp();
            std::map<std::string, AttributeCounts> counts;
            double mean_sum = 0.0;
            const auto start = std::chrono::steady_clock::now();

            // Policies without tool access still need a transport to hold.
            mcp::InProcessTransport no_tools(std::make_shared<mcp::Registry>());
            std::optional<host::Agent> agent;
            if (spec.kind == PolicySpec::Kind::agent)
            {
                agent.emplace(spec.agent, transport ? *transport : no_tools, aliases, backends[p].get());
            }
            const host::Query query{"", config.attributes};

            for (std::size_t i = 0; i < scenes.size(); ++i)
            {
                const auto &scene = scenes[i];
                const std::span<const double> h = scene.features.values;
                std::set<std::string> failed;
                AgentVerdict verdict;
                if (!agent)
                    verdict = baseline_naive(h, config.attributes);
                else
                {
                    try
                    {
                        auto run = agent->run(query, h);
                        verdict = std::move(run.verdict);
                        failed = failed_attributes(run.trace);
                    }
                    catch (const Error &e)
                    {
                        failed.insert(config.attributes.begin(), config.attributes.end());
                        pr.failure_log.push_back("sample " + std::to_string(i) + ": " + e.what());
                        say("policy " + spec.name + ", sample " + std::to_string(i) + ": " + e.what());
                    }
                }

                int hits = 0;
                for (const auto &attr : config.attributes)
                {
                    auto &c = counts[attr];
                    if (failed.count(attr))
                    {
                        ++c.failures;
                        continue;
                    }
                    const auto it = verdict.values.find(attr);
                    if (it != verdict.values.end() && it->second == scene.labels.at(attr))
                    {
                        ++c.correct;
                        ++hits;
                    }
                    else
                        ++c.wrong;
                }
                mean_sum += static_cast<double>(hits) / static_cast<double>(config.attributes.size());
            }

            pr.average_accuracy = mean_sum / static_cast<double>(scenes.size());
            for (const auto &attr : config.attributes)
                pr.attributes.emplace_back(attr, counts[attr]);
            pr.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            say("policy " + pr.name + ": average accuracy " + percent(pr.average_accuracy) + "% in " +
                format_double(pr.runtime_seconds) + " s");
            report.policies.push_back(std::move(pr));
        }
        return report;
    }

    ReportFormat parse_report_format(const std::string &name)
    {
        if (name == "table")
            return ReportFormat::table;
        if (name == "csv")
            return ReportFormat::csv;
        if (name == "json")
            return ReportFormat::json;
        fail(ErrorKind::usage, "unknown report format " + name);
    }

    std::string extension(ReportFormat format)
    {
        switch (format)
        {
        case ReportFormat::table: return ".md";
        case ReportFormat::csv: return ".csv";
        case ReportFormat::json: return ".json";
        }
        return "";
    }

    std::string render_table(const Report &report)
    {
        std::ostringstream out;
        out << "| Policy | Raw accuracy (%) | +MCP (%) |\n";
        out << "|---|---|---|\n";
        for (const auto &p : report.policies)
        {
            const std::string pct = percent(p.average_accuracy);
            out << "| " << p.name << " | " << (p.uses_mcp ? "-" : pct) << " | " << (p.uses_mcp ? pct : "-")
                << " |\n";
        }
        out << "\n| Policy |";
        for (const auto &attr : report.attributes)
            out << ' ' << attr << " |";
        out << " Failures |\n|---|";
        for (std::size_t i = 0; i <= report.attributes.size(); ++i)
            out << "---|";
        out << '\n';
        for (const auto &p : report.policies)
        {
            std::size_t failures = 0;
            out << "| " << p.name << " |";
            for (const auto &[attr, c] : p.attributes)
            {
                out << ' ' << percent(c.accuracy()) << " |";
                failures += c.failures;
            }
            out << ' ' << failures << " |\n";
        }
        return out.str();
    }

    std::string render_csv(const Report &report)
    {
        std::ostringstream out;
        out << kCsvHeader << '\n';
        for (const auto &p : report.policies)
        {
            out << "policy," << p.name << ",average,,accuracy," << format_double(p.average_accuracy) << '\n';
            for (const auto &[attr, c] : p.attributes)
            {
                const std::string prefix = "policy," + p.name + "," + attr + ",,";
                out << prefix << "accuracy," << format_double(c.accuracy()) << '\n';
                out << prefix << "correct," << c.correct << '\n';
                out << prefix << "wrong," << c.wrong << '\n';
                out << prefix << "failures," << c.failures << '\n';
            }
        }
        for (const auto &curve : report.curves)
        {
            const auto &h = curve.history;
            const auto loss_s = expert::moving_average(h.train_loss, report.smoothing_window);
            const auto acc_s = expert::moving_average(h.test_accuracy, report.smoothing_window);
            for (std::size_t e = 0; e < h.epochs(); ++e)
            {
                const std::string prefix = "curve,," + curve.attribute + "," + std::to_string(e) + ",";
                out << prefix << "train_loss," << format_double(h.train_loss[e]) << '\n';
                out << prefix << "test_accuracy," << format_double(h.test_accuracy[e]) << '\n';
                out << prefix << "train_loss_smoothed," << format_double(loss_s[e]) << '\n';
                out << prefix << "test_accuracy_smoothed," << format_double(acc_s[e]) << '\n';
            }
        }
        return out.str();
    }

    json report_to_json(const Report &report)
    {
        json doc;
        doc["sample_count"] = report.sample_count;
        doc["seed"] = report.seed;
        doc["attributes"] = report.attributes;
        doc["smoothing_window"] = report.smoothing_window;
        json policies = json::array();
        for (const auto &p : report.policies)
        {
            json attrs = json::object();
            for (const auto &[attr, c] : p.attributes)
                attrs[attr] = {{"accuracy", c.accuracy()},
                               {"correct", c.correct},
                               {"wrong", c.wrong},
                               {"failures", c.failures}};
            policies.push_back({{"name", p.name},
                                {"uses_mcp", p.uses_mcp},
                                {"average_accuracy", p.average_accuracy},
                                {"attributes", std::move(attrs)}});
        }
        doc["policies"] = std::move(policies);
        json curves = json::array();
        for (const auto &c : report.curves)
            curves.push_back({{"attribute", c.attribute},
                              {"train_loss", c.history.train_loss},
                              {"test_accuracy", c.history.test_accuracy},
                              {"train_loss_smoothed",
                               expert::moving_average(c.history.train_loss, report.smoothing_window)},
                              {"test_accuracy_smoothed",
                               expert::moving_average(c.history.test_accuracy, report.smoothing_window)}});
        doc["curves"] = std::move(curves);
        return doc;
    }

    void emit_report(const Report &report, ReportFormat format, const std::filesystem::path &path)
    {
        std::string text;
        switch (format)
        {
        case ReportFormat::table: text = render_table(report); break;
        case ReportFormat::csv: text = render_csv(report); break;
        case ReportFormat::json: text = report_to_json(report).dump(2) + "\n"; break;
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorKind::io, "cannot write report " + path.string());
        out << text;
        if (!out.flush())
            fail(ErrorKind::io, "write failed for " + path.string());
    }

    std::map<std::pair<std::string, std::string>, double> parse_report_csv(const std::string &text)
    {
        std::map<std::pair<std::string, std::string>, double> out;
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line) || line != kCsvHeader)
            fail(ErrorKind::format, "report csv: unexpected header");
        std::size_t line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                cells.push_back(cell);
            if (!line.empty() && line.back() == ',')
                cells.emplace_back();
            if (cells.size() != 6)
                fail(ErrorKind::format, "report csv line " + std::to_string(line_no) + ": expected 6 fields");
            if (cells[0] == "policy" && cells[4] == "accuracy")
            {
                try
                {
                    out[{cells[1], cells[2]}] = std::stod(cells[5]);
                }
                catch (const std::exception &)
                {
                    fail(ErrorKind::format, "report csv line " + std::to_string(line_no) + ": bad value");
                }
            }
        }
        return out;
    }

    std::vector<std::string> validate_report_json(const json &doc)
    {
        std::vector<std::string> errs;
        auto need = [&](const json &obj, const char *key, auto pred, const std::string &where) {
            if (!obj.is_object() || !obj.contains(key) || !pred(obj[key]))
            {
                errs.push_back(where + "." + key + " missing or of the wrong type");
                return false;
            }
            return true;
        };
        const auto is_uint = [](const json &v) { return v.is_number_integer() && v.get<std::int64_t>() >= 0; };
        const auto is_num = [](const json &v) { return v.is_number(); };
        const auto is_arr = [](const json &v) { return v.is_array(); };
        const auto is_obj = [](const json &v) { return v.is_object(); };
        const auto is_str = [](const json &v) { return v.is_string(); };
        const auto is_bool = [](const json &v) { return v.is_boolean(); };
        const auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };

        if (!doc.is_object())
            return {"report is not an object"};
        const bool have_n = need(doc, "sample_count", is_uint, "report");
        need(doc, "seed", is_uint, "report");
        need(doc, "smoothing_window", is_uint, "report");
        std::vector<std::string> attrs;
        if (need(doc, "attributes", is_arr, "report"))
            for (const auto &a : doc["attributes"])
            {
                if (!a.is_string())
                    errs.push_back("report.attributes holds a non-string");
                else
                    attrs.push_back(a.get<std::string>());
            }
        if (need(doc, "policies", is_arr, "report"))
        {
            if (doc["policies"].empty())
                errs.push_back("report.policies is empty");
            for (std::size_t i = 0; i < doc["policies"].size(); ++i)
            {
                const json &p = doc["policies"][i];
                const std::string where = "report.policies[" + std::to_string(i) + "]";
                need(p, "name", is_str, where);
                need(p, "uses_mcp", is_bool, where);
                if (need(p, "average_accuracy", is_num, where) && !unit(p["average_accuracy"].get<double>()))
                    errs.push_back(where + ".average_accuracy outside [0, 1]");
                if (!need(p, "attributes", is_obj, where))
                    continue;
                if (p["attributes"].size() != attrs.size())
                    errs.push_back(where + ".attributes does not match report.attributes");
                for (const auto &attr : attrs)
                {
                    const std::string aw = where + ".attributes." + attr;
                    if (!p["attributes"].contains(attr))
                    {
                        errs.push_back(aw + " missing");
                        continue;
                    }
                    const json &c = p["attributes"][attr];
                    bool ok = need(c, "accuracy", is_num, aw);
                    ok = need(c, "correct", is_uint, aw) && ok;
                    ok = need(c, "wrong", is_uint, aw) && ok;
                    ok = need(c, "failures", is_uint, aw) && ok;
                    if (!ok)
                        continue;
                    if (!unit(c["accuracy"].get<double>()))
                        errs.push_back(aw + ".accuracy outside [0, 1]");
                    const auto total = c["correct"].get<std::size_t>() + c["wrong"].get<std::size_t>() +
                                       c["failures"].get<std::size_t>();
                    if (have_n && total != doc["sample_count"].get<std::size_t>())
                        errs.push_back(aw + " counts do not sum to sample_count");
                }
            }
        }
        if (need(doc, "curves", is_arr, "report"))
            for (std::size_t i = 0; i < doc["curves"].size(); ++i)
            {
                const json &c = doc["curves"][i];
                const std::string where = "report.curves[" + std::to_string(i) + "]";
                need(c, "attribute", is_str, where);
                std::size_t len = 0;
                bool first = true;
                for (const char *key : {"train_loss", "test_accuracy", "train_loss_smoothed", "test_accuracy_smoothed"})
                {
                    if (!need(c, key, is_arr, where))
                        continue;
                    if (!std::all_of(c[key].begin(), c[key].end(), is_num))
                        errs.push_back(where + "." + key + " holds a non-number");
                    if (first)
                        len = c[key].size();
                    else if (c[key].size() != len)
                        errs.push_back(where + "." + key + " length differs");
                    first = false;
                }
            }
        return errs;
    }
}
