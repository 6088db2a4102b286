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

#include <vector>

#include "hsehqmm/dataset.hpp"
#include "hsehqmm/features.hpp"
#include "hsehqmm/inference.hpp"
#include "hsehqmm/model.hpp"

/// Two-stage regression for HSE-HQMMs and truncated back-propagation
/// through time over the learned tensor.
namespace hqmm::learning {

using model::HqmmConfig;
using model::HqmmModel;
using model::StateMode;

/// Raw windows around every valid time index t of every sequence:
/// history y_{t-k..t-1}, future y_{t..t+k}, shifted future y_{t+1..t+k+1}
/// and the observation y_t. Windows are concatenated observations.
struct WindowedFeatures {
    Matrix history;
    Matrix future;
    Matrix shifted;
    Matrix observations;
    Index window = 0;
    /// Sequence each column came from, and its time index there.
    std::vector<Index> sequence_index;
    std::vector<Index> time_index;

    Index count() const { return observations.cols(); }
};

/// Sequences shorter than 2k + 2 contribute nothing; it is an error if no
/// sequence contributes.
WindowedFeatures build_windows(const SequenceDataset &data, Index k);

struct FeatureMaps {
    features::FeatureMap observation;
    features::FeatureMap history;
    features::FeatureMap future;
};

/// Samples the three maps (Gaussian RFF for continuous data, one-hot for
/// discrete), with bandwidths from the config or the median heuristic per
/// stream, then projects each onto its leading state_size principal
/// directions when that is smaller than the raw dimension.
FeatureMaps fit_feature_maps(const WindowedFeatures &windows, const HqmmConfig &config);

/// Columns are unit features (pure mode) or vectorized rank-1 densities
/// (mixed mode).
struct EmbeddedWindows {
    Matrix observations;
    Matrix history;
    Matrix future;
    Matrix shifted;
};

EmbeddedWindows embed_windows(const WindowedFeatures &windows, const FeatureMaps &maps, StateMode mode);

/// Column t is s_t kron y_t.
Matrix extended_future(const Matrix &shifted, const Matrix &observations);

struct Stage1Result {
    inference::ConditionalOperator future_given_history;
    inference::ConditionalOperator extended_given_history;
    Matrix denoised_future;
    Matrix denoised_extended;
};

/// Both regressions use the sample-averaged covariances, so lambda enters the
/// Gram systems as n * lambda: C = (F H^T / n)(H H^T / n + lambda I)^-1.
Stage1Result stage1(const EmbeddedWindows &embedded, double lambda);

/// C = (G U^T / n)(U U^T / n + lambda I)^-1 from the denoised states, reshaped
/// so that mode 1 is the state embedding and mode 2 the observation embedding.
inference::ConditionalTensor stage2(const Stage1Result &denoised, Index observation_embedding_dim, double lambda);

/// Largest raw prediction-sample density met while filtering `data`; steps
/// whose conditioning fails keep the previous state.
double peak_sample_density(const HqmmModel &model, const SequenceDataset &data);

/// Rescales the tensor so that peak_sample_density on `data` is at most 1.
/// Filtering and density ratios are unchanged. Returns the peak before scaling.
double calibrate_densities(HqmmModel &model, const SequenceDataset &data);

/// Full two-stage regression, including the initial state, the prediction
/// sample and density calibration. Uses every sequence in `train`.
HqmmModel train_2sr(const SequenceDataset &train, const HqmmConfig &config);

// ---------------------------------------------------------------------------
// Gradient refinement.

/// Precomputed embeddings for one window of consecutive observations.
struct WindowData {
    Matrix values;      // d x L, conditioned on in order
    Matrix lookahead;   // d x A, rollout targets only
    Matrix embeddings;  // observation embedding per column of values
    /// Symbol of each value then each lookahead column, for the perplexity loss.
    std::vector<Index> symbols;
};

/// `rows` are consecutive observations (one per row); `lookahead` rows follow
/// them and are only used as targets of open-loop predictions.
WindowData make_window(const HqmmModel &model, const Matrix &rows, const Matrix &lookahead = Matrix());

/// Samples over which the loss evaluates predictions, with embeddings in the
/// model's state mode.
struct LossSamples {
    Matrix values;
    Matrix embeddings;
};

LossSamples make_loss_samples(const HqmmModel &model);

struct WindowResult {
    double loss = 0.0;
    Matrix gradient;
    Vector final_state;
    /// Steps processed before a degenerate density ended the window early.
    Index steps = 0;
    bool degenerate = false;
};

/// Mean loss over the window starting from `start` and its gradient with
/// respect to the tensor data. From the filtered state before each step t the
/// model predicts y_t, then rolls forward open loop (transition_step) and
/// predicts y_{t+1}, ..., up to config.loss_horizon predictions or the last
/// target. States are normalized but not projected.
WindowResult window_loss_gradient(const HqmmModel &model, const Matrix &tensor_data, const Vector &start,
                                  const WindowData &window, const LossSamples &samples, bool with_gradient = true);

/// Scales `gradient` to Frobenius norm at most `max_norm`; returns the norm
/// before clipping.
double clip_gradient(Matrix &gradient, double max_norm);

struct BpttReport {
    std::vector<double> epoch_loss;
    Index windows = 0;
    Index degenerate_windows = 0;
};

/// SGD over truncated windows with carried, detached states; feature maps
/// stay fixed. The refined tensor is recalibrated on `train`.
HqmmModel bptt_refine(const HqmmModel &initial, const SequenceDataset &train, const HqmmConfig &config,
                      BpttReport *report = nullptr);

}  // namespace hqmm::learning
