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

#include <benchmark/benchmark.h>

#include <random>

#include "harness/synthetic.hpp"
#include "hsehqmm/inference.hpp"
#include "hsehqmm/learning.hpp"
#include "hsehqmm/model.hpp"

using namespace hqmm;

namespace {

/// One-hot two-state joint sample of size n with a fixed likelihood table.
struct Joint {
    Matrix ups;
    Matrix phi;
    Vector alpha;
};

Joint one_hot_joint(Index n) {
    std::mt19937_64 rng(1);
    std::bernoulli_distribution coin(0.5);
    Joint j{Matrix::Zero(2, n), Matrix::Zero(2, n), Vector::Constant(n, 1.0 / static_cast<double>(n))};
    for (Index i = 0; i < n; ++i) {
        const Index x = coin(rng) ? 1 : 0;
        const Index y = std::bernoulli_distribution(x == 0 ? 0.2 : 0.7)(rng) ? 1 : 0;
        j.ups(x, i) = 1.0;
        j.phi(y, i) = 1.0;
    }
    return j;
}

void BM_NadarayaWatson(benchmark::State &state) {
    const Joint j = one_hot_joint(state.range(0));
    const Vector k = (j.phi.transpose() * Vector::Unit(2, 1)).array().square();
    for (auto _ : state) {
        benchmark::DoNotOptimize(inference::nw_condition(inference::BeliefWeights{j.alpha}, k));
    }
}
BENCHMARK(BM_NadarayaWatson)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000);

void BM_KernelBayesRule(benchmark::State &state) {
    const Joint j = one_hot_joint(state.range(0));
    const Matrix k_xx = inference::gram(j.ups, j.ups);
    const Matrix k_yy = inference::gram(j.phi, j.phi);
    const Vector k_col = j.phi.transpose() * Vector::Unit(2, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            inference::kernel_bayes_weights(k_xx, k_yy, k_col, inference::BeliefWeights{j.alpha}, 1e-8));
    }
}
BENCHMARK(BM_KernelBayesRule)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

model::HqmmModel oscillator_model(model::StateMode mode, Index features) {
    const SequenceDataset data = harness::gen_noisy_oscillator({0.05, 0.125}, 0.1, 1, 1000, 3);
    model::HqmmConfig config;
    config.feature_count = features;
    config.state_size = 10;
    config.window = 5;
    config.n_density_samples = 100;
    config.mode = mode;
    config.seed = 1;
    return learning::train_2sr(data, config);
}

void BM_FilterStep(benchmark::State &state) {
    const auto mode = state.range(0) == 0 ? model::StateMode::kPure : model::StateMode::kMixed;
    const model::HqmmModel m = oscillator_model(mode, 200);
    const Vector y = Vector::Constant(1, 0.3);
    const model::FilterState start = model::initial_state(m);
    for (auto _ : state) {
        model::FilterState s = model::filter_step(m, start, y);
        benchmark::DoNotOptimize(s.mu.data());
    }
    state.SetLabel(state.range(0) == 0 ? "pure" : "mixed");
}
BENCHMARK(BM_FilterStep)->Arg(0)->Arg(1);

void BM_PointPredict(benchmark::State &state) {
    const model::HqmmModel m = oscillator_model(model::StateMode::kPure, 200);
    const model::PredictionSet samples = m.prediction_set();
    const model::FilterState s = model::initial_state(m);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model::point_predict(m, s, samples));
    }
}
BENCHMARK(BM_PointPredict);

void BM_Train2sr(benchmark::State &state) {
    const SequenceDataset data = harness::gen_noisy_oscillator({0.05, 0.125}, 0.1, 1, 1000, 3);
    model::HqmmConfig config;
    config.feature_count = state.range(0);
    config.state_size = 10;
    config.window = 5;
    config.n_density_samples = 100;
    config.seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(learning::train_2sr(data, config));
    }
}
BENCHMARK(BM_Train2sr)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
