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

#include <algorithm>
#include <cmath>
#include <string>

#include "hsehqmm/quantum.hpp"

namespace hqmm::model {

namespace {

Index integer_sqrt(Index n) {
    auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    return r * r == n ? r : -1;
}

Matrix symmetrized(const Matrix &m) { return 0.5 * (m + m.transpose()); }

/// Eigen-decomposition of a density state with negative weights dropped.
struct Mixture {
    Vector weights;
    Matrix vectors;
};

Mixture mixture_of(const Matrix &rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(rho));
    return Mixture{solver.eigenvalues().cwiseMax(0.0), solver.eigenvectors()};
}

FilterState density_state(const Matrix &rho, const FilterState &previous, double last_density) {
    FilterState next;
    next.mu = quantum::vectorize(quantum::project_to_density(rho));
    next.form = FilterState::Form::kDensity;
    next.t = previous.t + 1;
    next.last_density = last_density;
    return next;
}

void require_observation(const HqmmModel &model, const Vector &y) {
    require(y.size() == model.observation_map.input_dim(), ErrorCode::kDimensionMismatch,
            "observation has dimension " + std::to_string(y.size()) + ", model expects " +
                std::to_string(model.observation_map.input_dim()));
}

}  // namespace

std::string to_string(StateMode mode) { return mode == StateMode::kPure ? "pure" : "mixed"; }

std::string to_string(ObservationKind kind) {
    return kind == ObservationKind::kContinuous ? "continuous" : "discrete";
}

std::string to_string(LossKind loss) { return loss == LossKind::kMse ? "mse" : "perplexity"; }

StateMode parse_state_mode(const std::string &text) {
    if (text == "pure") {
        return StateMode::kPure;
    }
    if (text == "mixed") {
        return StateMode::kMixed;
    }
    fail(ErrorCode::kConfig, "mode must be 'pure' or 'mixed', got '" + text + "'");
}

ObservationKind parse_observation_kind(const std::string &text) {
    if (text == "continuous") {
        return ObservationKind::kContinuous;
    }
    if (text == "discrete") {
        return ObservationKind::kDiscrete;
    }
    fail(ErrorCode::kConfig, "observation must be 'continuous' or 'discrete', got '" + text + "'");
}

LossKind parse_loss_kind(const std::string &text) {
    if (text == "mse") {
        return LossKind::kMse;
    }
    if (text == "perplexity") {
        return LossKind::kPerplexity;
    }
    fail(ErrorCode::kConfig, "loss must be 'mse' or 'perplexity', got '" + text + "'");
}

void HqmmConfig::validate() const {
    auto positive = [](bool ok, const char *key) {
        require(ok, ErrorCode::kConfig, std::string("config key '") + key + "' must be positive");
    };
    positive(feature_count >= 1, "D");
    positive(lambda > 0.0 && std::isfinite(lambda), "lambda");
    positive(window >= 1, "window");
    positive(state_size >= 1, "state_size");
    require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorCode::kConfig,
            "config key 'lr' must be nonnegative");
    positive(bptt_horizon >= 1, "bptt_horizon");
    require(epochs >= 0, ErrorCode::kConfig, "config key 'epochs' must be nonnegative");
    positive(batch >= 1, "batch");
    positive(grad_clip > 0.0, "grad_clip");
    positive(prediction_horizon >= 1, "prediction_horizon");
    positive(n_density_samples >= 1, "n_density_samples");
    positive(marginal_draws >= 1, "marginal_draws");
    positive(loss_horizon >= 1, "loss_horizon");
    require(hull_samples >= 0, ErrorCode::kConfig, "config key 'hull_samples' must be nonnegative");
    require(bandwidth >= 0.0 && std::isfinite(bandwidth), ErrorCode::kConfig,
            "config key 'bandwidth' must be nonnegative (0 selects the median heuristic)");
    if (observation == ObservationKind::kDiscrete) {
        require(n_symbols >= 2, ErrorCode::kConfig, "discrete observations need 'n_symbols' >= 2");
    }
    if (loss == LossKind::kPerplexity) {
        require(observation == ObservationKind::kDiscrete, ErrorCode::kConfig,
                "the perplexity loss needs discrete observations");
    }
}

// ---------------------------------------------------------------------------

Index HqmmModel::state_dim() const { return mode == StateMode::kPure ? params.out1() : integer_sqrt(params.out1()); }

Index HqmmModel::observation_dim() const { return observation_map.output_dim(); }

void HqmmModel::validate() const {
    require(params.in() == params.out1(), ErrorCode::kDimensionMismatch,
            "tensor mode 3 must match the state embedding dimension");
    const Index dy = observation_map.output_dim();
    if (mode == StateMode::kPure) {
        require(params.out2() == dy, ErrorCode::kDimensionMismatch,
                "tensor mode 2 must match the observation feature dimension");
    } else {
        require(state_dim() > 0, ErrorCode::kDimensionMismatch, "mixed-mode state length must be a perfect square");
        require(params.out2() == dy * dy, ErrorCode::kDimensionMismatch,
                "tensor mode 2 must match the vectorized observation density dimension");
    }
    require(initial_state.size() == params.in(), ErrorCode::kDimensionMismatch,
            "initial state length does not match the tensor");
    require(params.data().allFinite() && initial_state.allFinite(), ErrorCode::kInvalidArgument,
            "model parameters must be finite");
    require(prediction_samples.rows() == observation_map.input_dim() && prediction_samples.cols() >= 1,
            ErrorCode::kDimensionMismatch, "prediction samples must be non-empty observation columns");
}

Vector HqmmModel::observation_embedding(const Vector &y) const {
    const Vector phi = observation_map.embed(y);
    return mode == StateMode::kPure ? phi : features::outer_vectorized(phi);
}

PredictionSet HqmmModel::prepare(const Matrix &values) const {
    require(values.rows() == observation_map.input_dim() && values.cols() >= 1, ErrorCode::kDimensionMismatch,
            "prediction sample must be a non-empty set of observation columns");
    return PredictionSet{values, observation_map.embed_columns(values)};
}

Matrix FilterState::density() const {
    if (form == Form::kVector) {
        return mu * mu.transpose();
    }
    return quantum::unvectorize(mu);
}

FilterState initial_state(const HqmmModel &model) {
    FilterState state;
    state.mu = model.initial_state;
    state.form = model.mode == StateMode::kPure ? FilterState::Form::kVector : FilterState::Form::kDensity;
    return state;
}

Matrix joint_matrix(const HqmmModel &model, const Vector &mu) { return inference::contract_mode3(model.params, mu); }

FilterState filter_step(const HqmmModel &model, const FilterState &state, const Vector &y) {
    require_observation(model, y);
    const Vector phi = model.observation_embedding(y);
    if (model.mode == StateMode::kMixed) {
        const Vector v = joint_matrix(model, state.mu) * phi;
        const double density = quantum::trace_functional(model.state_dim()).dot(v);
        require(density > inference::kDensityFloor, ErrorCode::kZeroProbability,
                "observation density " + std::to_string(density) + " is below the conditioning floor");
        return density_state(quantum::unvectorize(Vector(v / density)), state, density);
    }
    if (state.form == FilterState::Form::kVector) {
        const Vector v = joint_matrix(model, state.mu) * phi;
        const double density = v.squaredNorm();
        require(density > inference::kDensityFloor, ErrorCode::kZeroProbability,
                "observation density " + std::to_string(density) + " is below the conditioning floor");
        FilterState next;
        next.mu = v / std::sqrt(density);
        next.form = FilterState::Form::kVector;
        next.t = state.t + 1;
        next.last_density = density;
        return next;
    }
    const Mixture mix = mixture_of(state.density());
    Matrix rho = Matrix::Zero(model.state_dim(), model.state_dim());
    for (Index r = 0; r < mix.weights.size(); ++r) {
        if (mix.weights(r) > 0.0) {
            const Vector v = joint_matrix(model, mix.vectors.col(r)) * phi;
            rho += mix.weights(r) * v * v.transpose();
        }
    }
    const double density = rho.trace();
    require(density > inference::kDensityFloor, ErrorCode::kZeroProbability,
            "observation density " + std::to_string(density) + " is below the conditioning floor");
    return density_state(rho / density, state, density);
}

DensityValue classify_density(double raw) {
    DensityValue value;
    value.raw = raw;
    value.violated = !(raw >= 0.0 && raw <= 1.0);
    value.clamped = std::isfinite(raw) ? std::clamp(raw, 0.0, 1.0) : 0.0;
    return value;
}

Matrix reduced_observation_density(const HqmmModel &model, const FilterState &state) {
    if (model.mode == StateMode::kMixed) {
        const Matrix m = joint_matrix(model, state.mu);
        const Vector r = m.transpose() * quantum::trace_functional(model.state_dim());
        return symmetrized(quantum::unvectorize(r));
    }
    if (state.form == FilterState::Form::kVector) {
        const Matrix m = joint_matrix(model, state.mu);
        return m.transpose() * m;
    }
    const Mixture mix = mixture_of(state.density());
    Matrix rho_y = Matrix::Zero(model.observation_dim(), model.observation_dim());
    for (Index r = 0; r < mix.weights.size(); ++r) {
        if (mix.weights(r) > 0.0) {
            const Matrix m = joint_matrix(model, mix.vectors.col(r));
            rho_y += mix.weights(r) * m.transpose() * m;
        }
    }
    return rho_y;
}

DensityValue observation_density(const HqmmModel &model, const FilterState &state, const Vector &y) {
    require_observation(model, y);
    const Vector phi = model.observation_map.embed(y);
    return classify_density(phi.dot(reduced_observation_density(model, state) * phi));
}

Vector sample_densities(const HqmmModel &model, const FilterState &state, const PredictionSet &samples) {
    require(samples.features.rows() == model.observation_dim(), ErrorCode::kDimensionMismatch,
            "prediction set was embedded with a different feature map");
    if (model.mode == StateMode::kPure && state.form == FilterState::Form::kVector) {
        return (joint_matrix(model, state.mu) * samples.features).colwise().squaredNorm().transpose();
    }
    const Matrix rho_y = reduced_observation_density(model, state);
    return (samples.features.array() * (rho_y * samples.features).array()).colwise().sum().transpose();
}

DensityBounds density_bounds(const HqmmModel &model, const FilterState &state) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(reduced_observation_density(model, state), Eigen::EigenvaluesOnly);
    return DensityBounds{solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

Prediction point_predict(const HqmmModel &model, const FilterState &state, const PredictionSet &samples) {
    require(samples.size() >= 1, ErrorCode::kInvalidArgument, "point prediction needs at least one sample");
    const Vector raw = sample_densities(model, state, samples);
    Vector weights(raw.size());
    Prediction out;
    out.evaluated = raw.size();
    for (Index i = 0; i < raw.size(); ++i) {
        const DensityValue value = classify_density(raw(i));
        weights(i) = value.clamped;
        out.violations += value.violated ? 1 : 0;
    }
    const double total = weights.sum();
    require(total > inference::kDensityFloor, ErrorCode::kZeroProbability,
            "every prediction sample has zero density");
    out.value = samples.values * weights / total;
    return out;
}

FilterState transition_step(const HqmmModel &model, const FilterState &state) {
    const Index ds = model.state_dim();
    const Index dy = model.observation_dim();
    if (model.mode == StateMode::kMixed) {
        const Vector v = joint_matrix(model, state.mu) * quantum::trace_functional(dy);
        return density_state(quantum::unvectorize(v), state, state.last_density);
    }
    if (state.form == FilterState::Form::kVector) {
        const Matrix m = joint_matrix(model, state.mu);
        return density_state(m * m.transpose(), state, state.last_density);
    }
    const Mixture mix = mixture_of(state.density());
    Matrix rho = Matrix::Zero(ds, ds);
    for (Index r = 0; r < mix.weights.size(); ++r) {
        if (mix.weights(r) > 0.0) {
            const Matrix m = joint_matrix(model, mix.vectors.col(r));
            rho += mix.weights(r) * m * m.transpose();
        }
    }
    return density_state(rho, state, state.last_density);
}

Vector predicted_embedding(const HqmmModel &model, const FilterState &state, const PredictionSet &samples) {
    const Vector raw = sample_densities(model, state, samples);
    Vector weights(raw.size());
    for (Index i = 0; i < raw.size(); ++i) {
        weights(i) = classify_density(raw(i)).clamped;
    }
    const double total = weights.sum();
    require(total > inference::kDensityFloor, ErrorCode::kZeroProbability,
            "every prediction sample has zero density");
    return samples.features * weights / total;
}

FilterState transition_step(const HqmmModel &model, const FilterState &state, const PredictionSet &samples) {
    if (model.mode == StateMode::kMixed) {
        return transition_step(model, state);
    }
    const Vector mean = predicted_embedding(model, state, samples);
    if (state.form == FilterState::Form::kVector) {
        const Vector v = joint_matrix(model, state.mu) * mean;
        const double norm = v.norm();
        require(norm > inference::kDensityFloor, ErrorCode::kDegenerateState,
                "state vanished under the predicted observation embedding");
        FilterState next;
        next.mu = v / norm;
        next.form = FilterState::Form::kVector;
        next.t = state.t + 1;
        next.last_density = state.last_density;
        return next;
    }
    const Mixture mix = mixture_of(state.density());
    Matrix rho = Matrix::Zero(model.state_dim(), model.state_dim());
    for (Index r = 0; r < mix.weights.size(); ++r) {
        if (mix.weights(r) > 0.0) {
            const Vector v = joint_matrix(model, mix.vectors.col(r)) * mean;
            rho += mix.weights(r) * v * v.transpose();
        }
    }
    require(rho.trace() > inference::kDensityFloor, ErrorCode::kDegenerateState,
            "state vanished under the predicted observation embedding");
    return density_state(rho, state, state.last_density);
}

Prediction predict_horizon(const HqmmModel &model, const FilterState &state, Index horizon,
                           const PredictionSet &samples) {
    require(horizon >= 1, ErrorCode::kInvalidArgument, "prediction horizon must be >= 1");
    FilterState rolled = state;
    for (Index h = 1; h < horizon; ++h) {
        rolled = transition_step(model, rolled, samples);
    }
    return point_predict(model, rolled, samples);
}

Matrix marginal_density_grid(const HqmmModel &model, const std::vector<FilterState> &states, Index feature_index,
                             const Vector &grid, const Matrix &draws) {
    const Index d = model.observation_map.input_dim();
    require(feature_index >= 0 && feature_index < d, ErrorCode::kInvalidArgument,
            "feature index " + std::to_string(feature_index) + " out of range for dimension " + std::to_string(d));
    require(grid.size() >= 1, ErrorCode::kInvalidArgument, "density grid must be non-empty");
    const Index n_draws = d == 1 ? 1 : draws.cols();
    require(d == 1 || (draws.rows() == d && n_draws >= 1), ErrorCode::kDimensionMismatch,
            "marginalization draws must be observation columns");
    Matrix points(d, grid.size() * n_draws);
    for (Index g = 0; g < grid.size(); ++g) {
        for (Index k = 0; k < n_draws; ++k) {
            Vector y = d == 1 ? Vector(Vector::Zero(1)) : Vector(draws.col(k));
            y(feature_index) = grid(g);
            points.col(g * n_draws + k) = y;
        }
    }
    const PredictionSet queries = model.prepare(points);
    Matrix out(static_cast<Index>(states.size()), grid.size());
    for (std::size_t t = 0; t < states.size(); ++t) {
        const Vector raw = sample_densities(model, states[t], queries);
        for (Index g = 0; g < grid.size(); ++g) {
            double acc = 0.0;
            for (Index k = 0; k < n_draws; ++k) {
                acc += classify_density(raw(g * n_draws + k)).clamped;
            }
            out(static_cast<Index>(t), g) = acc / static_cast<double>(n_draws);
        }
        const double total = out.row(static_cast<Index>(t)).sum();
        if (total > 0.0) {
            out.row(static_cast<Index>(t)) /= total;
        } else {
            out.row(static_cast<Index>(t)).setConstant(1.0 / static_cast<double>(grid.size()));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

HqmmModel model_from_hmm(const oracle::HiddenMarkovModel &hmm) {
    hmm.validate();
    const Index n = hmm.n_states();
    const Index s = hmm.n_symbols();
    const Index ds2 = n * n;
    const Index dy2 = s * s;
    // Diagonal-to-diagonal action: joint(x', y) = sum_x T(x', x) O(y, x) rho(x, x).
    Matrix data = Matrix::Zero(ds2 * dy2, ds2);
    for (Index x = 0; x < n; ++x) {
        for (Index xp = 0; xp < n; ++xp) {
            for (Index y = 0; y < s; ++y) {
                data((xp + n * xp) * dy2 + (y + s * y), x + n * x) = hmm.transition(xp, x) * hmm.emission(y, x);
            }
        }
    }
    Matrix samples(1, s);
    for (Index y = 0; y < s; ++y) {
        samples(0, y) = static_cast<double>(y);
    }
    HqmmConfig config;
    config.mode = StateMode::kMixed;
    config.observation = ObservationKind::kDiscrete;
    config.n_symbols = s;
    config.window = 1;
    HqmmModel model{
        inference::ConditionalTensor(std::move(data), ds2, dy2),
        features::FeatureMap(features::OneHotMap(s, 1)),
        std::nullopt,
        std::nullopt,
        quantum::vectorize(Matrix(hmm.initial.asDiagonal())),
        StateMode::kMixed,
        config,
        samples,
        false,
    };
    model.validate();
    return model;
}

HqmmModel model_from_unitary(const Matrix &orthogonal, Index state_dim, features::FeatureMap observation_map,
                             const Vector &initial_psi) {
    const Index dy = observation_map.output_dim();
    const Index total = state_dim * dy;
    require(orthogonal.rows() == total && orthogonal.cols() == total, ErrorCode::kDimensionMismatch,
            "orthogonal matrix must act on the state x observation feature space");
    require((orthogonal.transpose() * orthogonal - Matrix::Identity(total, total)).cwiseAbs().maxCoeff() <= 1e-9,
            ErrorCode::kInvalidArgument, "matrix is not orthogonal");
    require(initial_psi.size() == state_dim && std::abs(initial_psi.norm() - 1.0) <= 1e-9,
            ErrorCode::kInvalidArgument, "initial state must be a unit vector of the state dimension");
    Matrix data(total, state_dim);
    for (Index k = 0; k < state_dim; ++k) {
        data.col(k) = orthogonal.col(k * dy);
    }
    HqmmConfig config;
    config.mode = StateMode::kPure;
    config.state_size = state_dim;
    config.feature_count = dy;
    Matrix samples = Matrix::Zero(observation_map.input_dim(), 1);
    HqmmModel model{
        inference::ConditionalTensor(std::move(data), state_dim, dy),
        std::move(observation_map),
        std::nullopt,
        std::nullopt,
        initial_psi,
        StateMode::kPure,
        config,
        samples,
        false,
    };
    model.validate();
    return model;
}

inference::ConditionalTensor compose_tensor(const inference::ConditionalTensor &observation,
                                            const Matrix &transition) {
    require(transition.rows() == observation.in(), ErrorCode::kDimensionMismatch,
            "transition output does not match the observation tensor input");
    return inference::ConditionalTensor(observation.data() * transition, observation.out1(), observation.out2());
}

FilterState filter_step_split(const HqmmModel &observation_model, const Matrix &transition, const FilterState &state,
                              const Vector &y) {
    require(transition.cols() == state.mu.size(), ErrorCode::kDimensionMismatch,
            "transition input does not match the state");
    FilterState moved = state;
    moved.mu = transition * state.mu;
    return filter_step(observation_model, moved, y);
}

}  // namespace hqmm::model
