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

#include "hsehqmm/model.hpp"

#include <gtest/gtest.h>

#include "hsehqmm/quantum.hpp"
#include "support.hpp"

using namespace hqmm;
using namespace hqmm::model;
using hqmm::testing::Gen;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

/// Three-state cycle x -> x + 1 that emits its current state.
oracle::HiddenMarkovModel cycle_hmm() {
    oracle::HiddenMarkovModel hmm;
    hmm.transition = Matrix::Zero(3, 3);
    for (Index x = 0; x < 3; ++x) {
        hmm.transition((x + 1) % 3, x) = 1.0;
    }
    hmm.emission = Matrix::Identity(3, 3);
    hmm.initial = Vector::Unit(3, 0);
    return hmm;
}

/// Permutation sending |k>|0> to |k + 1>|k> on a 3 x 3 register.
Matrix cycle_permutation() {
    const Index n = 3;
    Matrix p = Matrix::Zero(n * n, n * n);
    std::vector<bool> used(n * n, false);
    std::vector<bool> filled(n * n, false);
    for (Index k = 0; k < n; ++k) {
        const Index row = ((k + 1) % n) * n + k;
        p(row, k * n) = 1.0;
        used[row] = true;
        filled[k * n] = true;
    }
    Index next = 0;
    for (Index c = 0; c < n * n; ++c) {
        if (filled[c]) {
            continue;
        }
        while (used[next]) {
            ++next;
        }
        p(next, c) = 1.0;
        used[next] = true;
    }
    return p;
}

HqmmModel random_unitary_model(Gen &g, Index state_dim, Index features, Index input_dim) {
    const features::RffMap rff = features::RffMap::sample(input_dim, features, 1.0, g.seed());
    return model_from_unitary(g.orthogonal(state_dim * features), state_dim, features::FeatureMap(rff),
                              g.unit_vector(state_dim));
}

bool valid_state(const HqmmModel &m, const FilterState &s) {
    if (m.mode == StateMode::kPure && s.form == FilterState::Form::kVector) {
        return std::abs(s.mu.norm() - 1.0) <= 1e-9;
    }
    return quantum::is_density_matrix(CMatrix(s.density().cast<Complex>()));
}

}  // namespace

TEST(HqmmConfig, DefaultsAndValidation) {
    HqmmConfig c;
    EXPECT_EQ(c.feature_count, 1000);
    EXPECT_EQ(c.lambda, 0.05);
    EXPECT_EQ(c.window, 10);
    EXPECT_EQ(c.state_size, 20);
    EXPECT_EQ(c.learning_rate, 0.1);
    EXPECT_EQ(c.bptt_horizon, 20);
    EXPECT_EQ(c.epochs, 50);
    EXPECT_EQ(c.batch, 20);
    EXPECT_EQ(c.grad_clip, 0.25);
    EXPECT_EQ(c.prediction_horizon, 10);
    EXPECT_NO_THROW(c.validate());
    c.lambda = 0.0;
    try {
        c.validate();
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kConfig);
        EXPECT_NE(std::string(e.what()).find("lambda"), std::string::npos);
    }
}

TEST(FilterStep, HmmModelMatchesForwardAlgorithm) {
    Gen g(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto hmm = hqmm::testing::random_hmm(g, g.index(2, 4), g.index(2, 4));
        const HqmmModel m = model_from_hmm(hmm);
        std::vector<Index> obs(static_cast<std::size_t>(g.index(1, 50)));
        for (Index &y : obs) {
            y = g.index(0, hmm.n_symbols() - 1);
        }
        const auto steps = oracle::forward_algorithm(hmm, obs);
        FilterState state = initial_state(m);
        for (std::size_t t = 0; t < obs.size(); ++t) {
            const Vector y = scalar(static_cast<double>(obs[t]));
            EXPECT_LE((state.density().diagonal() - steps[t].predictive_state).cwiseAbs().maxCoeff(), 1e-6);
            EXPECT_NEAR(observation_density(m, state, y).raw, steps[t].likelihood, 1e-6);
            double total = 0.0;
            for (Index s = 0; s < hmm.n_symbols(); ++s) {
                total += observation_density(m, state, scalar(static_cast<double>(s))).raw;
            }
            EXPECT_NEAR(total, 1.0, 1e-6);
            state = filter_step(m, state, y);
            EXPECT_NEAR(state.last_density, steps[t].likelihood, 1e-6);
            EXPECT_NEAR(state.density().trace(), 1.0, 1e-12);
            EXPECT_TRUE(valid_state(m, state));
        }
    }
}

TEST(FilterStep, StateIndependentJointReachesFixedPoint) {
    Gen g(2);
    oracle::HiddenMarkovModel hmm;
    const Vector p = g.probability(3);
    hmm.transition = p.replicate(1, 3);
    hmm.emission = g.stochastic(2, 3);
    hmm.initial = g.probability(3);
    const HqmmModel m = model_from_hmm(hmm);
    FilterState state = initial_state(m);
    for (int t = 0; t < 10; ++t) {
        state = filter_step(m, state, scalar(static_cast<double>(g.index(0, 1))));
        EXPECT_LE((state.density().diagonal() - p).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(FilterStep, ZeroDensityObservation) {
    const HqmmModel m = model_from_hmm(cycle_hmm());
    try {
        filter_step(m, initial_state(m), scalar(1.0));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kZeroProbability);
    }
    EXPECT_THROW(filter_step(m, initial_state(m), Vector::Zero(2)), Error);
}

TEST(FilterStep, PureModelsKeepUnitNorm) {
    Gen g(3);
    for (int trial = 0; trial < 10; ++trial) {
        const HqmmModel m = random_unitary_model(g, g.index(1, 4), g.index(2, 6), 1);
        FilterState state = initial_state(m);
        for (int t = 0; t < 30; ++t) {
            state = filter_step(m, state, scalar(g.normal()));
            EXPECT_TRUE(valid_state(m, state));
            EXPECT_EQ(state.t, t + 1);
        }
    }
}

TEST(ObservationDensity, ContinuousInY) {
    Gen g(4);
    const HqmmModel m = random_unitary_model(g, 3, 20, 1);
    const FilterState state = initial_state(m);
    for (int trial = 0; trial < 20; ++trial) {
        const double y = g.normal();
        const double a = observation_density(m, state, scalar(y)).raw;
        const double b = observation_density(m, state, scalar(y + 1e-6)).raw;
        EXPECT_LE(std::abs(a - b), 1e-4);
    }
}

TEST(ObservationDensity, SampleDensitiesAgree) {
    Gen g(5);
    const HqmmModel m = random_unitary_model(g, 3, 8, 2);
    FilterState state = filter_step(m, initial_state(m), g.normal_vector(2));
    const Matrix values = g.normal_matrix(2, 7);
    const Vector batch = sample_densities(m, state, m.prepare(values));
    // A density-form copy of the same state takes the mixture path.
    FilterState dense = state;
    dense.form = FilterState::Form::kDensity;
    dense.mu = quantum::vectorize(state.density());
    const Vector mixed = sample_densities(m, dense, m.prepare(values));
    for (Index i = 0; i < 7; ++i) {
        EXPECT_NEAR(batch(i), observation_density(m, state, values.col(i)).raw, 1e-12);
        EXPECT_NEAR(mixed(i), batch(i), 1e-10);
    }
}

TEST(ClassifyDensity, ClampsAndFlags) {
    EXPECT_FALSE(classify_density(0.3).violated);
    EXPECT_TRUE(classify_density(1.2).violated);
    EXPECT_EQ(classify_density(1.2).clamped, 1.0);
    EXPECT_TRUE(classify_density(-0.1).violated);
    EXPECT_EQ(classify_density(-0.1).clamped, 0.0);
    EXPECT_TRUE(classify_density(std::nan("")).violated);
    EXPECT_EQ(classify_density(std::nan("")).clamped, 0.0);
}

TEST(DensityBounds, MaximallyMixedReducedDensity) {
    oracle::HiddenMarkovModel hmm;
    hmm.transition = Matrix::Identity(2, 2);
    hmm.emission = Matrix::Constant(4, 2, 0.25);
    hmm.initial = Vector::Constant(2, 0.5);
    const HqmmModel m = model_from_hmm(hmm);
    const DensityBounds b = density_bounds(m, initial_state(m));
    EXPECT_NEAR(b.low, 0.25, 1e-12);
    EXPECT_NEAR(b.high, 0.25, 1e-12);
}

TEST(DensityBounds, PureReducedDensity) {
    const features::RffMap rff = features::RffMap::sample(1, 4, 1.0, 3);
    const HqmmModel m = model_from_unitary(Matrix::Identity(8, 8), 2, features::FeatureMap(rff), Vector::Unit(2, 1));
    const DensityBounds b = density_bounds(m, initial_state(m));
    EXPECT_NEAR(b.low, 0.0, 1e-12);
    EXPECT_NEAR(b.high, 1.0, 1e-12);
}

TEST(DensityBounds, OracleModelsRespectBoundsAndUnitInterval) {
    Gen g(6);
    for (int trial = 0; trial < 5; ++trial) {
        const HqmmModel m = random_unitary_model(g, g.index(1, 3), g.index(2, 6), 2);
        FilterState state = filter_step(m, initial_state(m), g.normal_vector(2));
        const DensityBounds b = density_bounds(m, state);
        for (int q = 0; q < 1000; ++q) {
            const DensityValue f = observation_density(m, state, 2.0 * g.normal_vector(2));
            EXPECT_FALSE(f.violated);
            EXPECT_GE(f.raw, b.low - 1e-9);
            EXPECT_LE(f.raw, b.high + 1e-9);
        }
    }
}

TEST(PointPredict, SingleSampleAndSymmetry) {
    Gen g(7);
    const HqmmModel m = random_unitary_model(g, 2, 6, 1);
    const FilterState state = initial_state(m);
    const PredictionSet one = m.prepare(Matrix::Constant(1, 1, 0.7));
    EXPECT_NEAR(point_predict(m, state, one).value(0), 0.7, 1e-15);

    oracle::HiddenMarkovModel hmm;
    hmm.transition = Matrix::Identity(2, 2);
    hmm.emission = Matrix::Constant(2, 2, 0.5);
    hmm.initial = Vector::Constant(2, 0.5);
    const HqmmModel flat = model_from_hmm(hmm);
    EXPECT_NEAR(point_predict(flat, initial_state(flat), flat.prediction_set()).value(0), 0.5, 1e-12);
}

TEST(PointPredict, HmmExpectedSymbol) {
    Gen g(8);
    const auto hmm = hqmm::testing::random_hmm(g, 3, 4);
    const HqmmModel m = model_from_hmm(hmm);
    const std::vector<Index> obs = {1, 3, 0, 2, 2};
    const auto steps = oracle::forward_algorithm(hmm, obs);
    FilterState state = initial_state(m);
    for (std::size_t t = 0; t < obs.size(); ++t) {
        double expected = 0.0;
        for (Index s = 0; s < 4; ++s) {
            expected += static_cast<double>(s) * steps[t].predictive_symbols(s);
        }
        const Prediction p = point_predict(m, state, m.prediction_set());
        EXPECT_NEAR(p.value(0), expected, 1e-6);
        EXPECT_EQ(p.violations, 0);
        EXPECT_EQ(p.evaluated, 4);
        state = filter_step(m, state, scalar(static_cast<double>(obs[t])));
    }
}

TEST(PredictHorizon, HorizonOneIsPointPredict) {
    Gen g(9);
    const HqmmModel m = random_unitary_model(g, 3, 6, 1);
    const FilterState state = filter_step(m, initial_state(m), scalar(0.2));
    const PredictionSet samples = m.prepare(g.normal_matrix(1, 9));
    EXPECT_EQ(predict_horizon(m, state, 1, samples).value, point_predict(m, state, samples).value);
    EXPECT_THROW(predict_horizon(m, state, 0, samples), Error);
}

TEST(PredictHorizon, DeterministicCycleMixed) {
    const HqmmModel m = model_from_hmm(cycle_hmm());
    const FilterState state = filter_step(m, initial_state(m), scalar(0.0));
    for (Index h = 1; h <= 7; ++h) {
        EXPECT_NEAR(predict_horizon(m, state, h, m.prediction_set()).value(0), static_cast<double>(h % 3), 1e-12);
    }
}

TEST(PredictHorizon, DeterministicCyclePure) {
    const HqmmModel m = model_from_unitary(cycle_permutation(), 3, features::FeatureMap(features::OneHotMap(3, 1)),
                                           Vector::Unit(3, 0));
    Matrix symbols(1, 3);
    symbols << 0, 1, 2;
    const PredictionSet samples = m.prepare(symbols);
    const FilterState state = filter_step(m, initial_state(m), scalar(0.0));
    for (Index h = 1; h <= 7; ++h) {
        EXPECT_NEAR(predict_horizon(m, state, h, samples).value(0), static_cast<double>(h % 3), 1e-12);
    }
}

TEST(TransitionStep, RolloutStatesStayValid) {
    Gen g(10);
    for (int trial = 0; trial < 5; ++trial) {
        const HqmmModel pure = random_unitary_model(g, 3, 5, 1);
        const PredictionSet samples = pure.prepare(g.normal_matrix(1, 12));
        FilterState a = filter_step(pure, initial_state(pure), scalar(g.normal()));
        FilterState b = a;
        for (int h = 0; h < 6; ++h) {
            a = transition_step(pure, a, samples);
            b = transition_step(pure, b);
            EXPECT_TRUE(valid_state(pure, a));
            EXPECT_TRUE(valid_state(pure, b));
        }
        const auto hmm = hqmm::testing::random_hmm(g, 3, 3);
        const HqmmModel mixed = model_from_hmm(hmm);
        FilterState c = initial_state(mixed);
        for (int h = 0; h < 6; ++h) {
            const Vector expected = hmm.transition * c.density().diagonal();
            c = transition_step(mixed, c, mixed.prediction_set());
            EXPECT_TRUE(valid_state(mixed, c));
            EXPECT_LE((c.density().diagonal() - expected).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(SplitUpdate, MatchesCombinedTensor) {
    Gen g(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = g.index(2, 4);
        const Index s = g.index(2, 4);
        oracle::HiddenMarkovModel obs_hmm;
        obs_hmm.transition = Matrix::Identity(n, n);
        obs_hmm.emission = g.stochastic(s, n);
        obs_hmm.initial = g.probability(n);
        const HqmmModel observation_model = model_from_hmm(obs_hmm);
        const Matrix t = g.stochastic(n, n);
        // vec(T rho T^T) = (T kron T) vec(rho).
        const Matrix transition = quantum::kron(t, t);
        HqmmModel combined = observation_model;
        combined.params = compose_tensor(observation_model.params, transition);
        FilterState a = initial_state(combined);
        FilterState b = a;
        for (int step = 0; step < 10; ++step) {
            const Vector y = scalar(static_cast<double>(g.index(0, s - 1)));
            a = filter_step(combined, a, y);
            b = filter_step_split(observation_model, transition, b, y);
            EXPECT_LE((a.mu - b.mu).cwiseAbs().maxCoeff(), 1e-8);
            EXPECT_NEAR(a.last_density, b.last_density, 1e-8);
        }
    }
}

TEST(MarginalDensityGrid, OneDimensionalEqualsJoint) {
    Gen g(12);
    const HqmmModel m = random_unitary_model(g, 3, 10, 1);
    std::vector<FilterState> states = {initial_state(m)};
    states.push_back(filter_step(m, states.back(), scalar(0.4)));
    Vector grid = Vector::LinSpaced(11, -2.0, 2.0);
    const Matrix out = marginal_density_grid(m, states, 0, grid, Matrix());
    for (std::size_t t = 0; t < states.size(); ++t) {
        Vector joint(grid.size());
        for (Index i = 0; i < grid.size(); ++i) {
            joint(i) = observation_density(m, states[t], scalar(grid(i))).clamped;
        }
        joint /= joint.sum();
        EXPECT_LE((out.row(static_cast<Index>(t)).transpose() - joint).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(MarginalDensityGrid, RowsSumToOne) {
    Gen g(13);
    const HqmmModel m = random_unitary_model(g, 2, 12, 3);
    std::vector<FilterState> states = {initial_state(m)};
    for (int t = 0; t < 5; ++t) {
        states.push_back(filter_step(m, states.back(), g.normal_vector(3)));
    }
    const Matrix draws = g.normal_matrix(3, 16);
    const Matrix out = marginal_density_grid(m, states, 1, Vector::LinSpaced(9, -1.0, 1.0), draws);
    ASSERT_EQ(out.rows(), 6);
    EXPECT_LE((out.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
    const Matrix single = marginal_density_grid(m, states, 2, Vector::Constant(1, 0.3), draws);
    EXPECT_LE((single.array() - 1.0).abs().maxCoeff(), 1e-15);
    EXPECT_THROW(marginal_density_grid(m, states, 3, Vector::Constant(1, 0.0), draws), Error);
}

TEST(HqmmModel, ValidateRejectsShapeMismatch) {
    HqmmModel m = model_from_hmm(cycle_hmm());
    m.initial_state = Vector::Zero(4);
    EXPECT_THROW(m.validate(), Error);
}
