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

#include "iox/dataset.hpp"
#include "iox/error.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

/// Expert backbone: f(h) = sigmoid(W3 relu(W2 relu(W1 h + b1) + b2) + b3),
/// trained with mean binary cross-entropy by plain mini-batch gradient descent.
namespace iox::expert
{
    using dataset::AttributeDataset;
    using dataset::LabeledExample;

    inline constexpr double kBceEpsilon = 1e-12;
    inline constexpr double kDefaultThreshold = 0.5;

    /// Row-major parameters of one expert. A gradient has the same layout.
    struct MlpWeights
    {
        int n = 0;
        int h1 = 0;
        int h2 = 0;
        std::vector<double> w1; // h1 x n
        std::vector<double> b1; // h1
        std::vector<double> w2; // h2 x h1
        std::vector<double> b2; // h2
        std::vector<double> w3; // 1 x h2
        double b3 = 0.0;

        static MlpWeights zeros(int n, int h1, int h2);

        // Uniform in [-a, a], a = sqrt(6 / (fan_in + fan_out)) per layer; biases zero.
        static MlpWeights glorot_uniform(int n, int h1, int h2, std::uint64_t seed);

        // Shape error on inconsistent sizes, schema error on non-finite entries.
        void validate() const;

        std::size_t parameter_count() const;

        // Visits every parameter in a fixed order (W1, b1, W2, b2, W3, b3).
        void for_each(const std::function<void(double &)> &fn);

        bool operator==(const MlpWeights &) const = default;
    };

    using Gradient = MlpWeights;

    struct TrainConfig
    {
        int epochs = 4000;
        double learning_rate = 0.01;
        int batch_size = 64;
        int h1 = 32;
        int h2 = 16;
        std::uint64_t seed = 0;
        std::optional<int> early_stop_patience;
        double threshold = kDefaultThreshold;

        void validate() const;
    };

    struct TrainHistory
    {
        std::vector<double> train_loss;
        std::vector<double> test_accuracy;

        std::size_t epochs() const { return train_loss.size(); }
        bool operator==(const TrainHistory &) const = default;
    };

    struct TrainResult
    {
        MlpWeights weights;
        TrainHistory history;
    };

    class TrainingDiverged : public Error
    {
    public:
        TrainingDiverged(int last_finite_epoch, const std::string &message)
            : Error(ErrorKind::training_diverged, message), last_finite_epoch_(last_finite_epoch) {}

        // -1 when no epoch finished with a finite loss.
        int last_finite_epoch() const noexcept { return last_finite_epoch_; }

    private:
        int last_finite_epoch_;
    };

    // Output lies in the open interval (0, 1) for every finite input.
    double forward(const MlpWeights &weights, std::span<const double> h);

    double bce_loss(std::span<const double> preds, std::span<const int> labels);

    // Exact gradient of the mean BCE over `batch`.
    Gradient gradient(const MlpWeights &weights, std::span<const LabeledExample> batch);

    using EpochCallback = std::function<void(int epoch, double train_loss, double test_accuracy)>;

    TrainResult train(const TrainConfig &config, const AttributeDataset &train_set, const AttributeDataset &test_set,
                      const EpochCallback &on_epoch = {});

    struct Evaluation
    {
        double accuracy = 0.0;
        std::vector<int> predictions;
        std::vector<double> confidences;
    };

    // prediction = 1 iff forward(h) >= threshold.
    Evaluation evaluate(const MlpWeights &weights, const AttributeDataset &dataset,
                        double threshold = kDefaultThreshold);

    void save_weights(const MlpWeights &weights, const std::filesystem::path &path);

    MlpWeights load_weights(const std::filesystem::path &path);

    std::string weights_to_string(const MlpWeights &weights);

    MlpWeights weights_from_string(const std::string &text);

    // Trailing moving average; the first window-1 points average what is available.
    std::vector<double> moving_average(std::span<const double> values, std::size_t window);

    void save_history(const TrainHistory &history, std::size_t smoothing_window, const std::filesystem::path &path);

    TrainHistory load_history(const std::filesystem::path &path);
}
