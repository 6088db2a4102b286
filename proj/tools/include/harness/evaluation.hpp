// Copyright 2026 The hsehqmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "hsehqmm/dataset.hpp"
#include "hsehqmm/model.hpp"

namespace harness {

using hqmm::Index;
using hqmm::Matrix;
using hqmm::SequenceDataset;
using hqmm::Vector;

struct EvalReport {
    Index horizon = 0;
    /// mse_curve[h - 1] is the mean squared error (per coordinate) of
    /// h-step-ahead predictions.
    std::vector<double> mse_curve;
    std::vector<double> baseline_curve;
    std::vector<Index> pair_counts;
    double mse_at_horizon = 0.0;
    /// Predicting the evaluation data's mean at every step.
    double baseline_mse = 0.0;
    bool has_perplexity = false;
    double perplexity = 0.0;
    Index density_evaluations = 0;
    Index violations = 0;
    /// Observations whose density fell below the conditioning floor; the
    /// filter keeps its previous state for those steps.
    Index degenerate_steps = 0;
    double seconds = 0.0;

    double violation_rate() const;
};

/// Filters each sequence from the model's initial state; before observing
/// y_t, predicts y_{t+h-1} for h = 1..horizon by rolling the state forward.
EvalReport evaluate(const hqmm::model::HqmmModel &model, const SequenceDataset &data, Index horizon);

/// key=value text; excludes wall-clock timings so reports are reproducible.
std::string format_report(const EvalReport &report, const hqmm::model::HqmmModel &model);
std::string format_curve_csv(const EvalReport &report);

/// Filtered predictive states (one per observation, before observing it).
std::vector<hqmm::model::FilterState> filter_states(const hqmm::model::HqmmModel &model, const Matrix &sequence,
                                                    Index *degenerate_steps = nullptr);

struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    Index steps = 0;

    Vector values() const;
};

GridSpec parse_grid(const std::string &text);

/// Heatmap CSV: a header of grid values plus "truth,prediction", then one row
/// per time step of the first sequence.
struct Heatmap {
    Vector grid;
    Matrix densities;
    Vector truth;
    Vector prediction;
};

Heatmap heatmap(const hqmm::model::HqmmModel &model, const Matrix &sequence, Index feature_index,
                const GridSpec &grid);
std::string format_heatmap_csv(const Heatmap &map);

struct BenchRow {
    Index n = 0;
    double nw_seconds = 0.0;
    double kbr_seconds = 0.0;
    double agreement = 0.0;
    double classical_error = 0.0;

    double ratio() const { return kbr_seconds / nw_seconds; }
};

/// Times Nadaraya-Watson against kernel-Bayes-rule conditioning on a one-hot
/// two-state system with n training points, after checking both posteriors.
/// `repeats` timings are taken per method and the minimum is kept.
BenchRow bench_conditioning(Index n, std::uint64_t seed, double lambda = 1e-8, Index repeats = 3);
std::string format_bench_csv(const std::vector<BenchRow> &rows);

}  // namespace harness
