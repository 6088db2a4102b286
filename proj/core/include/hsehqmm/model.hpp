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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsehqmm/features.hpp"
#include "hsehqmm/inference.hpp"
#include "hsehqmm/oracle.hpp"

/// The HSE-HQMM sequence model: a three-mode tensor mapping the predictive
/// state to a joint (next state, observation) embedding, filtered by
/// contraction and Nadaraya-Watson conditioning.
///
/// Pure mode keeps a unit vector psi and evaluates f(y) = |M phi(y)|^2 with
/// M = C x3 psi. Mixed mode keeps vec(rho) and evaluates
/// f(y) = vec(I)^T M vec(phi phi^T).
namespace hqmm::model {

enum class StateMode { kPure, kMixed };
enum class ObservationKind { kContinuous, kDiscrete };
enum class LossKind { kMse, kPerplexity };

std::string to_string(StateMode mode);
std::string to_string(ObservationKind kind);
std::string to_string(LossKind loss);
StateMode parse_state_mode(const std::string &text);
ObservationKind parse_observation_kind(const std::string &text);
LossKind parse_loss_kind(const std::string &text);

struct HqmmConfig {
    Index feature_count = 1000;
    double lambda = 0.05;
    Index window = 10;
    Index state_size = 20;
    double learning_rate = 0.1;
    Index bptt_horizon = 20;
    Index epochs = 50;
    Index batch = 20;
    double grad_clip = 0.25;
    Index prediction_horizon = 10;
    Index n_density_samples = 500;
    StateMode mode = StateMode::kPure;
    ObservationKind observation = ObservationKind::kContinuous;
    /// Alphabet size for discrete observations.
    Index n_symbols = 0;
    /// Random convex combinations of training-observation pairs added to the
    /// prediction sample.
    Index hull_samples = 0;
    LossKind loss = LossKind::kMse;
    /// Open-loop prediction steps scored by the refinement loss from each
    /// filtered state; 1 scores next-step predictions only.
    Index loss_horizon = 1;
    /// Gaussian kernel width; 0 selects the median neighbouring distance.
    double bandwidth = 0.0;
    Index marginal_draws = 64;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Observation values (d x m) with their embeddings, used for expectations.
struct PredictionSet {
    Matrix values;
    Matrix features;

    Index size() const { return values.cols(); }
};

struct HqmmModel {
    inference::ConditionalTensor params;
    features::FeatureMap observation_map;
    /// History and future maps used to fit the model; kept for inspection.
    std::optional<features::FeatureMap> history_map;
    std::optional<features::FeatureMap> future_map;
    /// Pure mode: unit vector of length state_dim(). Mixed: vec(rho).
    Vector initial_state;
    StateMode mode = StateMode::kPure;
    HqmmConfig config;
    /// Candidate observations (d x m) for expectations and rollouts.
    Matrix prediction_samples;
    bool refined = false;

    /// Side of the state space: psi length, or rho rows.
    Index state_dim() const;
    /// Length of the observation embedding: phi length, or rho_y rows.
    Index observation_dim() const;

    void validate() const;

    /// phi(y) in pure mode, vec(phi phi^T) in mixed mode.
    Vector observation_embedding(const Vector &y) const;
    PredictionSet prepare(const Matrix &values) const;
    PredictionSet prediction_set() const { return prepare(prediction_samples); }
};

/// Current belief. Pure-mode rollouts (transition updates without an
/// observation) produce a mixture of pure states, held as a density.
struct FilterState {
    enum class Form { kVector, kDensity };

    Vector mu;
    Form form = Form::kVector;
    Index t = 0;
    double last_density = 1.0;

    /// rho = psi psi^T for a vector state, unvec(mu) for a density state.
    Matrix density() const;
};

FilterState initial_state(const HqmmModel &model);

/// C x3 mu reshaped to (state embedding) x (observation embedding).
Matrix joint_matrix(const HqmmModel &model, const Vector &mu);

FilterState filter_step(const HqmmModel &model, const FilterState &state, const Vector &y);

struct DensityValue {
    double raw = 0.0;
    double clamped = 0.0;
    bool violated = false;
};

DensityValue classify_density(double raw);

DensityValue observation_density(const HqmmModel &model, const FilterState &state, const Vector &y);

/// Reduced density rho_Y on the observation feature space, such that
/// f(y) = phi(y)^T rho_Y phi(y).
Matrix reduced_observation_density(const HqmmModel &model, const FilterState &state);

/// Raw densities of every sample in a prediction set.
Vector sample_densities(const HqmmModel &model, const FilterState &state, const PredictionSet &samples);

struct DensityBounds {
    double low = 0.0;
    double high = 0.0;
};

DensityBounds density_bounds(const HqmmModel &model, const FilterState &state);

struct Prediction {
    Vector value;
    Index violations = 0;
    Index evaluated = 0;
};

/// Density-weighted mean of the samples, densities clamped to [0, 1].
Prediction point_predict(const HqmmModel &model, const FilterState &state, const PredictionSet &samples);

/// Partial trace over the observation register: rho' = M M^T (pure),
/// mu' = M vec(I) (mixed). For the mixed model of an HMM this is the exact
/// classical sum rule.
FilterState transition_step(const HqmmModel &model, const FilterState &state);

/// Mean embedding sum_i w_i phi(y_i) of the predicted observation, with w the
/// normalized clamped sample densities.
Vector predicted_embedding(const HqmmModel &model, const FilterState &state, const PredictionSet &samples);

/// One rollout step with the observation marginalized out. Pure models apply
/// the conditional operator to the predicted mean embedding,
/// psi' ~ M sum_i w_i phi_i; mixed models take the partial trace.
FilterState transition_step(const HqmmModel &model, const FilterState &state, const PredictionSet &samples);

Prediction predict_horizon(const HqmmModel &model, const FilterState &state, Index horizon,
                           const PredictionSet &samples);

/// Rows are time steps, columns grid values; each row sums to 1. `draws` holds
/// observation vectors (d x K) whose non-target coordinates are averaged over.
/// Rows whose densities are all zero are returned uniform.
Matrix marginal_density_grid(const HqmmModel &model, const std::vector<FilterState> &states, Index feature_index,
                             const Vector &grid, const Matrix &draws);

// ---------------------------------------------------------------------------
// Models assembled from known generative parameters.

/// Mixed-mode model with one-hot observations whose state is the forward
/// algorithm's predictive belief P(x_t | y_<t).
HqmmModel model_from_hmm(const oracle::HiddenMarkovModel &hmm);

/// Pure-mode model whose joint is the action of a real orthogonal matrix U on
/// |psi>|0>: C((i, j), k) = U((i, j), (k, 0)).
HqmmModel model_from_unitary(const Matrix &orthogonal, Index state_dim, features::FeatureMap observation_map,
                             const Vector &initial_psi);

/// Mixed-mode combination C_obs * T of an observation tensor and a
/// transition on vectorized states.
inference::ConditionalTensor compose_tensor(const inference::ConditionalTensor &observation, const Matrix &transition);

/// Transition by `transition`, then conditioning with the observation tensor
/// held in `observation_model`.
FilterState filter_step_split(const HqmmModel &observation_model, const Matrix &transition, const FilterState &state,
                              const Vector &y);

}  // namespace hqmm::model
