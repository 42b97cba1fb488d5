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

#include "iox/expert.hpp"

#include "iox/format.hpp"
#include "iox/random.hpp"
#include "iox/simd/kernels.hpp"

#include <json.hpp>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace iox::expert
{
    namespace
    {
        using ordered_json = nlohmann::ordered_json;

        const double kProbLow = DBL_MIN;
        const double kProbHigh = std::nextafter(1.0, 0.0);

        double sigmoid(double z)
        {
            double p;
            if (z >= 0.0)
                p = 1.0 / (1.0 + std::exp(-z));
            else
            {
                const double e = std::exp(z);
                p = e / (1.0 + e);
            }
            return std::clamp(p, kProbLow, kProbHigh);
        }

        std::size_t sz(int v) { return static_cast<std::size_t>(v); }

        /// Scratch buffers for one forward/backward pass.
        struct Workspace
        {
            std::vector<double> z1, a1, z2, a2, d1, d2;

            explicit Workspace(const MlpWeights &w)
                : z1(sz(w.h1)), a1(sz(w.h1)), z2(sz(w.h2)), a2(sz(w.h2)), d1(sz(w.h1)), d2(sz(w.h2)) {}
        };

        double forward_into(const MlpWeights &w, const double *x, Workspace &ws)
        {
            const auto &k = simd::active_kernels();
            for (int r = 0; r < w.h1; ++r)
            {
                ws.z1[sz(r)] = k.dot(&w.w1[sz(r) * sz(w.n)], x, sz(w.n)) + w.b1[sz(r)];
                ws.a1[sz(r)] = ws.z1[sz(r)] > 0.0 ? ws.z1[sz(r)] : 0.0;
            }
            for (int r = 0; r < w.h2; ++r)
            {
                ws.z2[sz(r)] = k.dot(&w.w2[sz(r) * sz(w.h1)], ws.a1.data(), sz(w.h1)) + w.b2[sz(r)];
                ws.a2[sz(r)] = ws.z2[sz(r)] > 0.0 ? ws.z2[sz(r)] : 0.0;
            }
            return sigmoid(k.dot(w.w3.data(), ws.a2.data(), sz(w.h2)) + w.b3);
        }

        // Adds scale * dL/dtheta for one example into `g`; returns the prediction.
        double accumulate_example(const MlpWeights &w, const double *x, int label, double scale, Gradient &g,
                                  Workspace &ws)
        {
            const auto &k = simd::active_kernels();
            const double p = forward_into(w, x, ws);
            const double d3 = (p - static_cast<double>(label)) * scale;

            k.axpy(d3, ws.a2.data(), g.w3.data(), sz(w.h2));
            g.b3 += d3;

            for (int r = 0; r < w.h2; ++r)
                ws.d2[sz(r)] = ws.z2[sz(r)] > 0.0 ? d3 * w.w3[sz(r)] : 0.0;

            std::fill(ws.d1.begin(), ws.d1.end(), 0.0);
            for (int r = 0; r < w.h2; ++r)
            {
                const double d = ws.d2[sz(r)];
                if (d == 0.0)
                    continue;
                k.axpy(d, ws.a1.data(), &g.w2[sz(r) * sz(w.h1)], sz(w.h1));
                g.b2[sz(r)] += d;
                k.axpy(d, &w.w2[sz(r) * sz(w.h1)], ws.d1.data(), sz(w.h1));
            }

            for (int r = 0; r < w.h1; ++r)
            {
                if (!(ws.z1[sz(r)] > 0.0))
                    continue;
                const double d = ws.d1[sz(r)];
                k.axpy(d, x, &g.w1[sz(r) * sz(w.n)], sz(w.n));
                g.b1[sz(r)] += d;
            }
            return p;
        }

        void zero(Gradient &g)
        {
            std::fill(g.w1.begin(), g.w1.end(), 0.0);
            std::fill(g.b1.begin(), g.b1.end(), 0.0);
            std::fill(g.w2.begin(), g.w2.end(), 0.0);
            std::fill(g.b2.begin(), g.b2.end(), 0.0);
            std::fill(g.w3.begin(), g.w3.end(), 0.0);
            g.b3 = 0.0;
        }

        void descend(MlpWeights &w, const Gradient &g, double lr)
        {
            const auto &k = simd::active_kernels();
            k.axpy(-lr, g.w1.data(), w.w1.data(), w.w1.size());
            k.axpy(-lr, g.b1.data(), w.b1.data(), w.b1.size());
            k.axpy(-lr, g.w2.data(), w.w2.data(), w.w2.size());
            k.axpy(-lr, g.b2.data(), w.b2.data(), w.b2.size());
            k.axpy(-lr, g.w3.data(), w.w3.data(), w.w3.size());
            const double step = -lr * g.b3;
            w.b3 = w.b3 + step;
        }

        void check_input(const MlpWeights &w, std::size_t len)
        {
            if (len != sz(w.n))
                fail(ErrorKind::shape, "expert expects " + std::to_string(w.n) + " features, got " +
                                           std::to_string(len));
        }

        double example_loss(double p, int y)
        {
            const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
            return y == 1 ? -std::log(q) : -std::log(1.0 - q);
        }
    }

    MlpWeights MlpWeights::zeros(int n, int h1, int h2)
    {
        if (n < 1 || h1 < 1 || h2 < 1)
            fail(ErrorKind::shape, "layer sizes must be >= 1");
        MlpWeights w;
        w.n = n;
        w.h1 = h1;
        w.h2 = h2;
        w.w1.assign(sz(h1) * sz(n), 0.0);
        w.b1.assign(sz(h1), 0.0);
        w.w2.assign(sz(h2) * sz(h1), 0.0);
        w.b2.assign(sz(h2), 0.0);
        w.w3.assign(sz(h2), 0.0);
        return w;
    }

    MlpWeights MlpWeights::glorot_uniform(int n, int h1, int h2, std::uint64_t seed)
    {
        MlpWeights w = zeros(n, h1, h2);
        Rng rng(seed);
        auto fill = [&rng](std::vector<double> &m, int fan_in, int fan_out) {
            const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (auto &v : m)
                v = rng.uniform(-a, a);
        };
        fill(w.w1, n, h1);
        fill(w.w2, h1, h2);
        fill(w.w3, h2, 1);
        return w;
    }

    void MlpWeights::validate() const
    {
        if (n < 1 || h1 < 1 || h2 < 1)
            fail(ErrorKind::shape, "layer sizes must be >= 1");
        if (w1.size() != sz(h1) * sz(n) || b1.size() != sz(h1) || w2.size() != sz(h2) * sz(h1) ||
            b2.size() != sz(h2) || w3.size() != sz(h2))
            fail(ErrorKind::shape, "weight arrays inconsistent with (n, h1, h2)");
        auto finite = [](const std::vector<double> &v) {
            return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
        };
        if (!finite(w1) || !finite(b1) || !finite(w2) || !finite(b2) || !finite(w3) || !std::isfinite(b3))
            fail(ErrorKind::schema, "weights contain non-finite values");
    }

    std::size_t MlpWeights::parameter_count() const
    {
        return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + 1;
    }

    void MlpWeights::for_each(const std::function<void(double &)> &fn)
    {
        for (auto *m : {&w1, &b1, &w2, &b2, &w3})
            for (auto &v : *m)
                fn(v);
        fn(b3);
    }

    void TrainConfig::validate() const
    {
        if (epochs < 1)
            fail(ErrorKind::parameter, "epochs must be >= 1");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            fail(ErrorKind::parameter, "learning_rate must be > 0");
        if (batch_size < 1)
            fail(ErrorKind::parameter, "batch_size must be >= 1");
        if (h1 < 1 || h2 < 1)
            fail(ErrorKind::parameter, "hidden sizes must be >= 1");
        if (early_stop_patience && *early_stop_patience < 1)
            fail(ErrorKind::parameter, "early_stop_patience must be >= 1");
    }

    double forward(const MlpWeights &weights, std::span<const double> h)
    {
        check_input(weights, h.size());
        Workspace ws(weights);
        return forward_into(weights, h.data(), ws);
    }

    double bce_loss(std::span<const double> preds, std::span<const int> labels)
    {
        if (preds.empty())
            fail(ErrorKind::parameter, "bce_loss needs at least one prediction");
        if (preds.size() != labels.size())
            fail(ErrorKind::parameter, "bce_loss: predictions and labels differ in length");
        double total = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i)
            total += example_loss(preds[i], labels[i]);
        return total / static_cast<double>(preds.size());
    }

    Gradient gradient(const MlpWeights &weights, std::span<const LabeledExample> batch)
    {
        if (batch.empty())
            fail(ErrorKind::parameter, "gradient needs a non-empty batch");
        weights.validate();
        Gradient g = MlpWeights::zeros(weights.n, weights.h1, weights.h2);
        Workspace ws(weights);
        const double scale = 1.0 / static_cast<double>(batch.size());
        for (const auto &ex : batch)
        {
            check_input(weights, ex.features.size());
            accumulate_example(weights, ex.features.values.data(), ex.label, scale, g, ws);
        }
        return g;
    }

    Evaluation evaluate(const MlpWeights &weights, const AttributeDataset &dataset, double threshold)
    {
        if (dataset.examples.empty())
            fail(ErrorKind::parameter, "cannot evaluate on an empty dataset");
        Workspace ws(weights);
        Evaluation ev;
        ev.predictions.reserve(dataset.size());
        ev.confidences.reserve(dataset.size());
        std::size_t correct = 0;
        for (const auto &ex : dataset.examples)
        {
            check_input(weights, ex.features.size());
            const double p = forward_into(weights, ex.features.values.data(), ws);
            const int pred = p >= threshold ? 1 : 0;
            correct += pred == ex.label;
            ev.predictions.push_back(pred);
            ev.confidences.push_back(p);
        }
        ev.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
        return ev;
    }

    TrainResult train(const TrainConfig &config, const AttributeDataset &train_set, const AttributeDataset &test_set,
                      const EpochCallback &on_epoch)
    {
        config.validate();
        if (train_set.examples.empty() || test_set.examples.empty())
            fail(ErrorKind::parameter, "training and test sets must be non-empty");
        const int n = train_set.feature_dim();
        if (test_set.feature_dim() != n)
            fail(ErrorKind::shape, "training and test sets differ in feature dimension");

        Rng rng(mix_seed(config.seed, 0x747261696e));
        TrainResult result;
        result.weights = MlpWeights::glorot_uniform(n, config.h1, config.h2, config.seed);
        MlpWeights &w = result.weights;
        Gradient g = MlpWeights::zeros(n, config.h1, config.h2);
        Workspace ws(w);

        std::vector<std::size_t> order(train_set.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t batch = sz(config.batch_size);

        double best_accuracy = -1.0;
        int since_best = 0;
        int last_finite = -1;
        for (int epoch = 0; epoch < config.epochs; ++epoch)
        {
            rng.shuffle(order);
            double loss_sum = 0.0;
            for (std::size_t start = 0; start < order.size(); start += batch)
            {
                const std::size_t stop = std::min(order.size(), start + batch);
                const double scale = 1.0 / static_cast<double>(stop - start);
                zero(g);
                for (std::size_t i = start; i < stop; ++i)
                {
                    const auto &ex = train_set.examples[order[i]];
                    const double p = accumulate_example(w, ex.features.values.data(), ex.label, scale, g, ws);
                    loss_sum += example_loss(p, ex.label);
                }
                descend(w, g, config.learning_rate);
            }
            const double loss = loss_sum / static_cast<double>(order.size());
            if (!std::isfinite(loss) || !std::isfinite(w.b3))
                throw TrainingDiverged(last_finite, "training diverged at epoch " + std::to_string(epoch) +
                                                        " (last finite epoch " + std::to_string(last_finite) + ")");
            last_finite = epoch;

            const double accuracy = evaluate(w, test_set, config.threshold).accuracy;
            result.history.train_loss.push_back(loss);
            result.history.test_accuracy.push_back(accuracy);
            if (on_epoch)
                on_epoch(epoch, loss, accuracy);

            if (config.early_stop_patience)
            {
                if (accuracy > best_accuracy)
                {
                    best_accuracy = accuracy;
                    since_best = 0;
                }
                else if (++since_best >= *config.early_stop_patience)
                    break;
            }
        }
        return result;
    }

    std::string weights_to_string(const MlpWeights &weights)
    {
        weights.validate();
        auto rows = [](const std::vector<double> &m, int r, int c) {
            ordered_json out = ordered_json::array();
            for (int i = 0; i < r; ++i)
                out.push_back(std::vector<double>(m.begin() + i * c, m.begin() + (i + 1) * c));
            return out;
        };
        ordered_json doc;
        doc["n"] = weights.n;
        doc["h1"] = weights.h1;
        doc["h2"] = weights.h2;
        doc["W1"] = rows(weights.w1, weights.h1, weights.n);
        doc["b1"] = weights.b1;
        doc["W2"] = rows(weights.w2, weights.h2, weights.h1);
        doc["b2"] = weights.b2;
        doc["W3"] = rows(weights.w3, 1, weights.h2);
        doc["b3"] = weights.b3;
        return doc.dump() + "\n";
    }

    MlpWeights weights_from_string(const std::string &text)
    {
        ordered_json doc;
        try
        {
            doc = ordered_json::parse(text);
        }
        catch (const ordered_json::parse_error &e)
        {
            fail(ErrorKind::format, std::string("weights: malformed document: ") + e.what());
        }
        if (!doc.is_object())
            fail(ErrorKind::format, "weights: document must be an object");
        for (const char *key : {"n", "h1", "h2", "W1", "b1", "W2", "b2", "W3", "b3"})
            if (!doc.contains(key))
                fail(ErrorKind::format, std::string("weights: missing field ") + key);
        for (const char *key : {"n", "h1", "h2"})
            if (!doc[key].is_number_integer() || doc[key].get<long long>() < 1)
                fail(ErrorKind::schema, std::string("weights: ") + key + " must be a positive integer");
        if (!doc["b3"].is_number())
            fail(ErrorKind::format, "weights: b3 must be a number");

        MlpWeights w;
        w.n = doc["n"].get<int>();
        w.h1 = doc["h1"].get<int>();
        w.h2 = doc["h2"].get<int>();

        auto vec = [](const ordered_json &v, const char *name, int len) {
            if (!v.is_array() || v.size() != sz(len))
                fail(ErrorKind::schema, std::string("weights: ") + name + " must have " + std::to_string(len) +
                                            " entries");
            std::vector<double> out;
            for (const auto &x : v)
            {
                if (!x.is_number())
                    fail(ErrorKind::format, std::string("weights: ") + name + " must contain numbers");
                out.push_back(x.get<double>());
            }
            return out;
        };
        auto mat = [&vec](const ordered_json &v, const char *name, int r, int c) {
            if (!v.is_array() || v.size() != sz(r))
                fail(ErrorKind::schema, std::string("weights: ") + name + " must have " + std::to_string(r) +
                                            " rows");
            std::vector<double> out;
            for (const auto &row : v)
            {
                const auto vals = vec(row, name, c);
                out.insert(out.end(), vals.begin(), vals.end());
            }
            return out;
        };
        w.w1 = mat(doc["W1"], "W1", w.h1, w.n);
        w.b1 = vec(doc["b1"], "b1", w.h1);
        w.w2 = mat(doc["W2"], "W2", w.h2, w.h1);
        w.b2 = vec(doc["b2"], "b2", w.h2);
        w.w3 = mat(doc["W3"], "W3", 1, w.h2);
        w.b3 = doc["b3"].get<double>();
        w.validate();
        return w;
    }

    void save_weights(const MlpWeights &weights, const std::filesystem::path &path)
    {
        const std::string text = weights_to_string(weights);
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file)
            fail(ErrorKind::io, "cannot open for writing: " + path.string());
        file << text;
        if (!file)
            fail(ErrorKind::io, "write failed: " + path.string());
    }

    MlpWeights load_weights(const std::filesystem::path &path)
    {
        std::ifstream file(path, std::ios::binary);
        if (!file)
            fail(ErrorKind::io, "cannot open for reading: " + path.string());
        std::stringstream buf;
        buf << file.rdbuf();
        return weights_from_string(buf.str());
    }

    std::vector<double> moving_average(std::span<const double> values, std::size_t window)
    {
        if (window == 0)
            fail(ErrorKind::parameter, "moving average window must be >= 1");
        std::vector<double> out(values.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            sum += values[i];
            if (i >= window)
                sum -= values[i - window];
            out[i] = sum / static_cast<double>(std::min(i + 1, window));
        }
        return out;
    }

    void save_history(const TrainHistory &history, std::size_t smoothing_window, const std::filesystem::path &path)
    {
        const auto loss_s = moving_average(history.train_loss, smoothing_window);
        const auto acc_s = moving_average(history.test_accuracy, smoothing_window);
        std::string out = "epoch,train_loss,test_accuracy,train_loss_smoothed,test_accuracy_smoothed\n";
        for (std::size_t i = 0; i < history.epochs(); ++i)
            out += std::to_string(i) + "," + format_double(history.train_loss[i]) + "," +
                   format_double(history.test_accuracy[i]) + "," + format_double(loss_s[i]) + "," +
                   format_double(acc_s[i]) + "\n";
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file)
            fail(ErrorKind::io, "cannot open for writing: " + path.string());
        file << out;
    }

    TrainHistory load_history(const std::filesystem::path &path)
    {
        std::ifstream file(path, std::ios::binary);
        if (!file)
            fail(ErrorKind::io, "cannot open for reading: " + path.string());
        TrainHistory h;
        std::string line;
        std::getline(file, line); // header
        std::size_t lineno = 1;
        while (std::getline(file, line))
        {
            ++lineno;
            if (line.empty())
                continue;
            std::stringstream ss(line);
            std::string epoch, loss, acc;
            if (!std::getline(ss, epoch, ',') || !std::getline(ss, loss, ',') || !std::getline(ss, acc, ','))
                fail(ErrorKind::format, path.string() + ": line " + std::to_string(lineno) + ": expected 3+ columns");
            try
            {
                h.train_loss.push_back(std::stod(loss));
                h.test_accuracy.push_back(std::stod(acc));
            }
            catch (const std::exception &)
            {
                fail(ErrorKind::format, path.string() + ": line " + std::to_string(lineno) + ": bad number");
            }
        }
        return h;
    }
}
