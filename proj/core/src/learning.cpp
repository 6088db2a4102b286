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

#include "hsehqmm/learning.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "hsehqmm/quantum.hpp"

namespace hqmm::learning {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr Index kMaxPcaColumns = 2000;

/// Rows t0..t0+len-1 of a sequence, concatenated in time order.
Vector flatten_rows(const Matrix &sequence, Index t0, Index len) {
    const Index d = sequence.cols();
    Vector out(len * d);
    for (Index i = 0; i < len; ++i) {
        out.segment(i * d, d) = sequence.row(t0 + i).transpose();
    }
    return out;
}

/// Median distance between consecutive columns taken from the same sequence.
double stream_bandwidth(const Matrix &columns, const std::vector<Index> &sequence_index) {
    std::vector<Matrix> runs;
    Index start = 0;
    for (Index c = 1; c <= columns.cols(); ++c) {
        if (c == columns.cols() || sequence_index[c] != sequence_index[start]) {
            runs.emplace_back(columns.middleCols(start, c - start).transpose());
            start = c;
        }
    }
    return features::median_neighbor_distance(runs);
}

Matrix evenly_spaced_columns(const Matrix &m, Index limit) {
    if (m.cols() <= limit) {
        return m;
    }
    Matrix out(m.rows(), limit);
    for (Index i = 0; i < limit; ++i) {
        out.col(i) = m.col(i * m.cols() / limit);
    }
    return out;
}

features::FeatureMap with_projection(features::FeatureMap::Base base, const Matrix &inputs, Index state_size) {
    features::FeatureMap plain(std::move(base));
    if (state_size >= plain.raw_dim()) {
        return plain;
    }
    const Matrix raw = plain.raw_columns(evenly_spaced_columns(inputs, kMaxPcaColumns));
    return features::FeatureMap(plain.base(), features::principal_basis(raw, state_size));
}

features::FeatureMap fit_stream(const Matrix &inputs, const std::vector<Index> &sequence_index, Index window,
                                const HqmmConfig &config, std::uint64_t seed) {
    if (config.observation == model::ObservationKind::kDiscrete) {
        return with_projection(features::OneHotMap(config.n_symbols, window), inputs, config.state_size);
    }
    const double bandwidth = config.bandwidth > 0.0 ? config.bandwidth : stream_bandwidth(inputs, sequence_index);
    return with_projection(features::RffMap::sample(inputs.rows(), config.feature_count, bandwidth, seed), inputs,
                           config.state_size);
}

Matrix embed_stream(const features::FeatureMap &map, const Matrix &inputs, StateMode mode) {
    const Matrix unit = map.embed_columns(inputs);
    if (mode == StateMode::kPure) {
        return unit;
    }
    Matrix out(unit.rows() * unit.rows(), unit.cols());
    for (Index c = 0; c < unit.cols(); ++c) {
        out.col(c) = features::outer_vectorized(unit.col(c));
    }
    return out;
}

Matrix prediction_values(const WindowedFeatures &windows, const HqmmConfig &config) {
    if (config.observation == model::ObservationKind::kDiscrete) {
        Matrix symbols(1, config.n_symbols);
        for (Index s = 0; s < config.n_symbols; ++s) {
            symbols(0, s) = static_cast<double>(s);
        }
        return symbols;
    }
    const Matrix base = evenly_spaced_columns(windows.observations, config.n_density_samples);
    if (config.hull_samples == 0) {
        return base;
    }
    Matrix out(base.rows(), base.cols() + config.hull_samples);
    out.leftCols(base.cols()) = base;
    std::mt19937_64 rng(config.seed + 4);
    std::uniform_int_distribution<Index> pick(0, base.cols() - 1);
    std::uniform_real_distribution<double> mix(0.0, 1.0);
    for (Index i = 0; i < config.hull_samples; ++i) {
        const Index a = pick(rng);
        const Index b = pick(rng);
        const double u = mix(rng);
        out.col(base.cols() + i) = u * base.col(a) + (1.0 - u) * base.col(b);
    }
    return out;
}

/// Row-major view of the contraction C mu as a (state x observation) matrix.
Matrix contract(const Matrix &data, Index out1, Index out2, const Vector &mu) {
    const Vector flat = data * mu;
    return Eigen::Map<const RowMajor>(flat.data(), out1, out2);
}

Vector flatten_row_major(const Matrix &m) {
    RowMajor r = m;
    return Eigen::Map<const Vector>(r.data(), r.size());
}

/// Forward quantities of one state node: M = C mu, the sample densities and
/// the prediction, plus the outgoing update when there is one.
struct Node {
    Vector mu;
    Matrix m;
    Matrix projected;  // M Phi, pure mode only
    Vector densities;
    double total = 0.0;
    Vector prediction;
    /// Conditioning vector of the outgoing update: the observation embedding
    /// (filter), the predicted mean embedding (pure rollout) or vec(I) (mixed
    /// rollout).
    Vector input;
    bool rollout = false;
    Vector v;
    double scale = 0.0;  // |v| in pure mode, trace(v) in mixed mode
    Vector next;
};

struct Term {
    Index node;
    Index target;  // column of the window's target matrix
};

}  // namespace

WindowedFeatures build_windows(const SequenceDataset &data, Index k) {
    require(k >= 1, ErrorCode::kInvalidArgument, "window must be >= 1");
    require(data.size() >= 1, ErrorCode::kInvalidArgument, "no sequences to window");
    const Index d = data.dim();
    Index total = 0;
    for (const Matrix &s : data.sequences) {
        total += std::max<Index>(0, s.rows() - 2 * k - 1);
    }
    require(total >= 1, ErrorCode::kInvalidArgument,
            "sequences are too short for window " + std::to_string(k) + ": need length > " +
                std::to_string(2 * k + 1));
    WindowedFeatures out;
    out.window = k;
    out.history.resize(k * d, total);
    out.future.resize((k + 1) * d, total);
    out.shifted.resize((k + 1) * d, total);
    out.observations.resize(d, total);
    Index col = 0;
    for (Index si = 0; si < data.size(); ++si) {
        const Matrix &s = data.sequences[static_cast<std::size_t>(si)];
        for (Index t = k; t + k + 1 < s.rows(); ++t) {
            out.history.col(col) = flatten_rows(s, t - k, k);
            out.future.col(col) = flatten_rows(s, t, k + 1);
            out.shifted.col(col) = flatten_rows(s, t + 1, k + 1);
            out.observations.col(col) = s.row(t).transpose();
            out.sequence_index.push_back(si);
            out.time_index.push_back(t);
            ++col;
        }
    }
    return out;
}

FeatureMaps fit_feature_maps(const WindowedFeatures &windows, const HqmmConfig &config) {
    config.validate();
    if (config.observation == model::ObservationKind::kDiscrete) {
        require(windows.observations.rows() == 1, ErrorCode::kDimensionMismatch,
                "discrete observations must be one-dimensional symbol indices");
    }
    return FeatureMaps{
        fit_stream(windows.observations, windows.sequence_index, 1, config, config.seed + 1),
        fit_stream(windows.history, windows.sequence_index, windows.window, config, config.seed + 2),
        fit_stream(windows.future, windows.sequence_index, windows.window + 1, config, config.seed + 3),
    };
}

EmbeddedWindows embed_windows(const WindowedFeatures &windows, const FeatureMaps &maps, StateMode mode) {
    require(maps.future.input_dim() == windows.future.rows() && maps.history.input_dim() == windows.history.rows() &&
                maps.observation.input_dim() == windows.observations.rows(),
            ErrorCode::kDimensionMismatch, "feature maps do not match the window dimensions");
    return EmbeddedWindows{
        embed_stream(maps.observation, windows.observations, mode),
        embed_stream(maps.history, windows.history, mode),
        embed_stream(maps.future, windows.future, mode),
        embed_stream(maps.future, windows.shifted, mode),
    };
}

Matrix extended_future(const Matrix &shifted, const Matrix &observations) {
    require(shifted.cols() == observations.cols(), ErrorCode::kDimensionMismatch,
            "extended future needs equal column counts, got " + std::to_string(shifted.cols()) + " and " +
                std::to_string(observations.cols()));
    const Index ds = shifted.rows();
    const Index dy = observations.rows();
    Matrix out(ds * dy, shifted.cols());
    for (Index c = 0; c < shifted.cols(); ++c) {
        for (Index i = 0; i < ds; ++i) {
            out.col(c).segment(i * dy, dy) = shifted(i, c) * observations.col(c);
        }
    }
    return out;
}

Stage1Result stage1(const EmbeddedWindows &embedded, double lambda) {
    require(lambda > 0.0, ErrorCode::kInvalidArgument, "stage 1 needs lambda > 0");
    const double ridge = lambda * static_cast<double>(embedded.history.cols());
    auto future = inference::fit_conditional(embedded.future, embedded.history, ridge);
    auto extended = inference::fit_conditional(extended_future(embedded.shifted, embedded.observations),
                                               embedded.history, ridge);
    Matrix denoised_future = future.matrix() * embedded.history;
    Matrix denoised_extended = extended.matrix() * embedded.history;
    return Stage1Result{std::move(future), std::move(extended), std::move(denoised_future),
                        std::move(denoised_extended)};
}

inference::ConditionalTensor stage2(const Stage1Result &denoised, Index observation_embedding_dim, double lambda) {
    require(lambda > 0.0, ErrorCode::kInvalidArgument, "stage 2 needs lambda > 0");
    const Index ds = denoised.denoised_future.rows();
    require(denoised.denoised_extended.rows() == ds * observation_embedding_dim, ErrorCode::kDimensionMismatch,
            "extended future dimension is not state x observation");
    const double ridge = lambda * static_cast<double>(denoised.denoised_future.cols());
    auto op = inference::fit_conditional(denoised.denoised_extended, denoised.denoised_future, ridge);
    return inference::ConditionalTensor(op.matrix(), ds, observation_embedding_dim);
}

double peak_sample_density(const HqmmModel &model, const SequenceDataset &data) {
    const model::PredictionSet samples = model.prediction_set();
    double peak = 0.0;
    for (const Matrix &s : data.sequences) {
        model::FilterState state = model::initial_state(model);
        for (Index t = 0; t < s.rows(); ++t) {
            peak = std::max(peak, model::sample_densities(model, state, samples).maxCoeff());
            try {
                state = model::filter_step(model, state, s.row(t).transpose());
            } catch (const Error &e) {
                if (e.code() != ErrorCode::kZeroProbability && e.code() != ErrorCode::kDegenerateState) {
                    throw;
                }
            }
        }
    }
    return peak;
}

double calibrate_densities(HqmmModel &model, const SequenceDataset &data) {
    const double peak = peak_sample_density(model, data);
    require(std::isfinite(peak), ErrorCode::kDivergence, "sample densities are not finite");
    if (peak > 1.0) {
        model.params.data() /= model.mode == StateMode::kPure ? std::sqrt(peak) : peak;
    }
    return peak;
}

HqmmModel train_2sr(const SequenceDataset &train, const HqmmConfig &config) {
    config.validate();
    train.validate();
    const WindowedFeatures windows = build_windows(train, config.window);
    FeatureMaps maps = fit_feature_maps(windows, config);
    const EmbeddedWindows embedded = embed_windows(windows, maps, config.mode);
    const Stage1Result first = stage1(embedded, config.lambda);
    inference::ConditionalTensor params = stage2(first, embedded.observations.rows(), config.lambda);

    Vector mean = first.denoised_future.rowwise().mean();
    Vector initial;
    if (config.mode == StateMode::kPure) {
        require(mean.norm() > 1e-12, ErrorCode::kDegenerateState, "denoised training states average to zero");
        initial = mean / mean.norm();
    } else {
        initial = quantum::vectorize(quantum::project_to_density(quantum::unvectorize(mean)));
    }
    HqmmModel out{
        std::move(params),
        std::move(maps.observation),
        std::move(maps.history),
        std::move(maps.future),
        std::move(initial),
        config.mode,
        config,
        prediction_values(windows, config),
        false,
    };
    out.validate();
    calibrate_densities(out, train);
    return out;
}

// ---------------------------------------------------------------------------

WindowData make_window(const HqmmModel &model, const Matrix &rows, const Matrix &lookahead) {
    require(lookahead.size() == 0 || lookahead.cols() == rows.cols(), ErrorCode::kDimensionMismatch,
            "lookahead rows must match the window dimension");
    WindowData w;
    w.values = rows.transpose();
    w.lookahead = lookahead.size() == 0 ? Matrix(rows.cols(), 0) : Matrix(lookahead.transpose());
    w.embeddings.resize(model.mode == StateMode::kPure ? model.observation_dim()
                                                       : model.observation_dim() * model.observation_dim(),
                        w.values.cols());
    for (Index t = 0; t < w.values.cols(); ++t) {
        w.embeddings.col(t) = model.observation_embedding(w.values.col(t));
    }
    if (model.config.loss == model::LossKind::kPerplexity) {
        for (Index t = 0; t < w.values.cols() + w.lookahead.cols(); ++t) {
            const double value = t < w.values.cols() ? w.values(0, t) : w.lookahead(0, t - w.values.cols());
            w.symbols.push_back(static_cast<Index>(std::llround(value)));
        }
    }
    return w;
}

LossSamples make_loss_samples(const HqmmModel &model) {
    LossSamples s;
    s.values = model.prediction_samples;
    s.embeddings.resize(model.mode == StateMode::kPure ? model.observation_dim()
                                                       : model.observation_dim() * model.observation_dim(),
                        s.values.cols());
    for (Index i = 0; i < s.values.cols(); ++i) {
        s.embeddings.col(i) = model.observation_embedding(s.values.col(i));
    }
    return s;
}

WindowResult window_loss_gradient(const HqmmModel &model, const Matrix &tensor_data, const Vector &start,
                                  const WindowData &window, const LossSamples &samples, bool with_gradient) {
    const Index out1 = model.params.out1();
    const Index out2 = model.params.out2();
    require(tensor_data.rows() == out1 * out2 && tensor_data.cols() == model.params.in(),
            ErrorCode::kDimensionMismatch, "tensor data shape does not match the model");
    require(start.size() == tensor_data.cols(), ErrorCode::kDimensionMismatch, "start state length mismatch");
    const bool pure = model.mode == StateMode::kPure;
    const bool perplexity = model.config.loss == model::LossKind::kPerplexity;
    const Index steps = window.values.cols();
    const Index targets = steps + window.lookahead.cols();
    const Index horizon = model.config.loss_horizon;
    const Index d = window.values.rows();
    const Vector trace_x = pure ? Vector() : quantum::trace_functional(model.state_dim());
    const Vector trace_y = pure ? Vector() : quantum::trace_functional(model.observation_dim());
    const double floor = pure ? std::sqrt(inference::kDensityFloor) : inference::kDensityFloor;

    auto target_value = [&](Index j) -> Vector {
        return j < steps ? Vector(window.values.col(j)) : Vector(window.lookahead.col(j - steps));
    };
    // Densities and prediction at mu; false if the node is degenerate.
    auto evaluate = [&](Node &n) {
        n.m = contract(tensor_data, out1, out2, n.mu);
        if (pure) {
            n.projected = n.m * samples.embeddings;
            n.densities = n.projected.colwise().squaredNorm().transpose();
        } else {
            n.densities = samples.embeddings.transpose() * (n.m.transpose() * trace_x);
        }
        n.total = n.densities.sum();
        if (!(n.total > inference::kDensityFloor)) {
            return false;
        }
        n.prediction = samples.values * n.densities / n.total;
        return true;
    };
    auto update = [&](Node &n, Vector input, bool rollout) {
        n.input = std::move(input);
        n.rollout = rollout;
        n.v = n.m * n.input;
        n.scale = pure ? n.v.norm() : trace_x.dot(n.v);
        if (!(n.scale > floor)) {
            return false;
        }
        n.next = n.v / n.scale;
        return true;
    };
    auto rollout_input = [&](const Node &n) -> Vector {
        return pure ? Vector(samples.embeddings * n.densities / n.total) : trace_y;
    };

    // Per filter step t: the filter node followed by its rollout chain.
    std::vector<std::vector<Node>> chains;
    std::vector<std::vector<Term>> chain_terms;
    chains.reserve(static_cast<std::size_t>(steps));
    WindowResult result;
    Index term_count = 0;
    Vector mu = start;
    for (Index t = 0; t < steps; ++t) {
        std::vector<Node> chain(1);
        std::vector<Term> terms{{0, t}};
        chain[0].mu = mu;
        bool ok = evaluate(chain[0]);
        for (Index h = 1; ok && h < horizon && t + h < targets; ++h) {
            Node &prev = chain.back();
            ok = update(prev, rollout_input(prev), true);
            if (ok) {
                Node next;
                next.mu = prev.next;
                chain.push_back(std::move(next));
                ok = evaluate(chain.back());
                terms.push_back({h, t + h});
            }
        }
        // The filter update leaves the first node; rollout chains branch off it.
        Node filter = chain[0];
        ok = ok && update(filter, window.embeddings.col(t), false);
        if (!ok) {
            result.degenerate = true;
            break;
        }
        chain.push_back(std::move(filter));
        double loss = 0.0;
        for (const Term &term : terms) {
            const Node &n = chain[static_cast<std::size_t>(term.node)];
            if (perplexity) {
                const Index sym = window.symbols[static_cast<std::size_t>(term.target)];
                require(sym >= 0 && sym < n.densities.size(), ErrorCode::kInvalidArgument,
                        "symbol outside the sample set");
                loss += -std::log(std::max(n.densities(sym), 1e-300) / n.total);
            } else {
                loss += (n.prediction - target_value(term.target)).squaredNorm() / static_cast<double>(d);
            }
        }
        result.loss += loss;
        term_count += static_cast<Index>(terms.size());
        mu = chain.back().next;
        chains.push_back(std::move(chain));
        chain_terms.push_back(std::move(terms));
    }
    result.steps = static_cast<Index>(chains.size());
    result.final_state = mu;
    if (result.steps == 0) {
        result.gradient = Matrix::Zero(tensor_data.rows(), tensor_data.cols());
        return result;
    }
    const double per_term = 1.0 / static_cast<double>(term_count);
    result.loss *= per_term;
    if (!with_gradient) {
        return result;
    }

    Matrix grad = Matrix::Zero(tensor_data.rows(), tensor_data.cols());
    // Backward through one node: g_out is the gradient on n.next (if the node
    // has an update), g_pred on n.prediction, sym the perplexity target or -1.
    auto backward = [&](const Node &n, const Vector *g_out, const Vector *g_pred, Index sym) -> Vector {
        Matrix gm = Matrix::Zero(n.m.rows(), n.m.cols());
        Vector gw = Vector::Zero(n.densities.size());
        Vector gf = Vector::Zero(n.densities.size());
        if (g_out != nullptr) {
            Vector gv;
            if (pure) {
                gv = (*g_out - n.next * n.next.dot(*g_out)) / n.scale;
            } else {
                gv = *g_out / n.scale - (g_out->dot(n.v) / (n.scale * n.scale)) * trace_x;
            }
            gm += gv * n.input.transpose();
            if (n.rollout && pure) {
                gw += samples.embeddings.transpose() * (n.m.transpose() * gv);
            }
        }
        if (g_pred != nullptr) {
            gw += samples.values.transpose() * *g_pred;
        }
        if (sym >= 0) {
            gf = Vector::Constant(n.densities.size(), per_term / n.total);
            gf(sym) -= per_term / n.densities(sym);
        }
        const Vector weights = n.densities / n.total;
        gf += (gw.array() - weights.dot(gw)).matrix() / n.total;
        if (pure) {
            gm += 2.0 * (n.projected * gf.asDiagonal()) * samples.embeddings.transpose();
        } else {
            gm += trace_x * (samples.embeddings * gf).transpose();
        }
        const Vector gflat = flatten_row_major(gm);
        grad.noalias() += gflat * n.mu.transpose();
        return tensor_data.transpose() * gflat;
    };

    Vector g_next = Vector::Zero(start.size());
    for (Index t = result.steps - 1; t >= 0; --t) {
        const auto &chain = chains[static_cast<std::size_t>(t)];
        const auto &terms = chain_terms[static_cast<std::size_t>(t)];
        const Index rolled = static_cast<Index>(chain.size()) - 1;  // last entry is the filter update
        Vector g_rollout;
        bool has_rollout = false;
        for (Index h = rolled - 1; h >= 0; --h) {
            const Node &n = chain[static_cast<std::size_t>(h)];
            const Term &term = terms[static_cast<std::size_t>(h)];
            Vector g_pred;
            Index sym = -1;
            if (perplexity) {
                sym = window.symbols[static_cast<std::size_t>(term.target)];
            } else {
                g_pred = (2.0 * per_term / static_cast<double>(d)) * (n.prediction - target_value(term.target));
            }
            const Vector *pred = perplexity ? nullptr : &g_pred;
            if (h == 0) {
                // The first node carries both the filter update and the rollout branch.
                const Node &filter = chain.back();
                Vector g_in = backward(filter, &g_next, pred, sym);
                if (has_rollout) {
                    g_in += backward(n, &g_rollout, nullptr, -1);
                }
                g_next = std::move(g_in);
            } else {
                g_rollout = backward(n, has_rollout ? &g_rollout : nullptr, pred, sym);
                has_rollout = true;
            }
        }
    }
    result.gradient = std::move(grad);
    return result;
}

double clip_gradient(Matrix &gradient, double max_norm) {
    require(max_norm > 0.0, ErrorCode::kInvalidArgument, "gradient clip must be positive");
    const double norm = gradient.norm();
    if (norm > max_norm) {
        gradient *= max_norm / norm;
    }
    return norm;
}

HqmmModel bptt_refine(const HqmmModel &initial, const SequenceDataset &train, const HqmmConfig &config,
                      BpttReport *report) {
    config.validate();
    initial.validate();
    HqmmModel model = initial;
    const LossSamples samples = make_loss_samples(model);

    std::vector<std::vector<WindowData>> sequences;
    for (const Matrix &s : train.sequences) {
        std::vector<WindowData> windows;
        for (Index t0 = 0; t0 < s.rows(); t0 += config.bptt_horizon) {
            const Index len = std::min(config.bptt_horizon, s.rows() - t0);
            const Index extra = std::min(config.loss_horizon - 1, s.rows() - t0 - len);
            windows.push_back(make_window(model, s.middleRows(t0, len), s.middleRows(t0 + len, extra)));
        }
        sequences.push_back(std::move(windows));
    }

    BpttReport local;
    Matrix &data = model.params.data();
    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        Matrix batch_grad = Matrix::Zero(data.rows(), data.cols());
        Index in_batch = 0;
        double epoch_loss = 0.0;
        Index epoch_windows = 0;
        auto apply = [&]() {
            if (in_batch == 0) {
                return;
            }
            batch_grad /= static_cast<double>(in_batch);
            clip_gradient(batch_grad, config.grad_clip);
            data -= config.learning_rate * batch_grad;
            batch_grad.setZero();
            in_batch = 0;
        };
        for (const auto &windows : sequences) {
            Vector state = model.initial_state;
            for (const WindowData &w : windows) {
                WindowResult r = window_loss_gradient(model, data, state, w, samples);
                require(std::isfinite(r.loss) && r.gradient.allFinite(), ErrorCode::kDivergence,
                        "refinement diverged at epoch " + std::to_string(epoch) + " (loss " +
                            std::to_string(r.loss) + "); lower the learning rate");
                if (r.degenerate) {
                    ++local.degenerate_windows;
                    state = model.initial_state;
                } else {
                    state = r.final_state;
                }
                if (r.steps == 0) {
                    continue;
                }
                epoch_loss += r.loss;
                ++epoch_windows;
                batch_grad += r.gradient;
                ++in_batch;
                if (in_batch == config.batch) {
                    apply();
                }
            }
        }
        apply();
        local.windows = epoch_windows;
        local.epoch_loss.push_back(epoch_windows > 0 ? epoch_loss / static_cast<double>(epoch_windows) : 0.0);
    }
    model.refined = config.epochs > 0;
    if (model.refined) {
        calibrate_densities(model, train);
    }
    if (report != nullptr) {
        *report = std::move(local);
    }
    return model;
}

}  // namespace hqmm::learning
