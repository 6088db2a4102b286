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

#include "harness/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "harness/io.hpp"
#include "hsehqmm/features.hpp"
#include "hsehqmm/inference.hpp"
#include "hsehqmm/oracle.hpp"

namespace harness {

using hqmm::Error;
using hqmm::ErrorCode;
using hqmm::require;
namespace model = hqmm::model;

namespace {

bool is_degenerate(const Error &e) {
    return e.code() == ErrorCode::kZeroProbability || e.code() == ErrorCode::kDegenerateState;
}

model::FilterState advance(const model::HqmmModel &m, const model::FilterState &state, const Vector &y,
                           Index &degenerate) {
    try {
        return model::filter_step(m, state, y);
    } catch (const Error &e) {
        if (!is_degenerate(e)) {
            throw;
        }
        ++degenerate;
        model::FilterState kept = state;
        ++kept.t;
        return kept;
    }
}

Matrix evenly_spaced(const Matrix &m, Index limit) {
    if (m.cols() <= limit) {
        return m;
    }
    Matrix out(m.rows(), limit);
    for (Index i = 0; i < limit; ++i) {
        out.col(i) = m.col(i * m.cols() / limit);
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double EvalReport::violation_rate() const {
    return density_evaluations == 0 ? 0.0
                                    : static_cast<double>(violations) / static_cast<double>(density_evaluations);
}

std::vector<model::FilterState> filter_states(const model::HqmmModel &m, const Matrix &sequence,
                                              Index *degenerate_steps) {
    std::vector<model::FilterState> states;
    states.reserve(static_cast<std::size_t>(sequence.rows()));
    model::FilterState state = model::initial_state(m);
    Index degenerate = 0;
    for (Index t = 0; t < sequence.rows(); ++t) {
        states.push_back(state);
        state = advance(m, state, sequence.row(t).transpose(), degenerate);
    }
    if (degenerate_steps != nullptr) {
        *degenerate_steps = degenerate;
    }
    return states;
}

EvalReport evaluate(const model::HqmmModel &m, const SequenceDataset &data, Index horizon) {
    const auto start = std::chrono::steady_clock::now();
    m.validate();
    data.validate();
    require(horizon >= 1, ErrorCode::kInvalidArgument, "horizon must be >= 1");
    require(data.dim() == m.observation_map.input_dim(), ErrorCode::kDimensionMismatch,
            "dataset dimension " + std::to_string(data.dim()) + " does not match the model's " +
                std::to_string(m.observation_map.input_dim()));
    for (const Matrix &s : data.sequences) {
        require(s.rows() >= horizon, ErrorCode::kInvalidArgument,
                "horizon " + std::to_string(horizon) + " exceeds the shortest sequence (" + std::to_string(s.rows()) +
                    " steps)");
    }
    const bool discrete = m.config.observation == model::ObservationKind::kDiscrete;
    const auto samples = m.prediction_set();
    const Vector sample_mean = m.prediction_samples.rowwise().mean();
    const Vector data_mean = data.observations_as_columns().rowwise().mean();
    const double d = static_cast<double>(data.dim());

    EvalReport report;
    report.horizon = horizon;
    report.mse_curve.assign(static_cast<std::size_t>(horizon), 0.0);
    report.baseline_curve.assign(static_cast<std::size_t>(horizon), 0.0);
    report.pair_counts.assign(static_cast<std::size_t>(horizon), 0);
    double nll = 0.0;
    Index nll_count = 0;

    for (const Matrix &seq : data.sequences) {
        model::FilterState state = model::initial_state(m);
        for (Index t = 0; t < seq.rows(); ++t) {
            model::FilterState rolled = state;
            for (Index h = 1; h <= horizon && t + h - 1 < seq.rows(); ++h) {
                if (h > 1) {
                    try {
                        rolled = model::transition_step(m, rolled, samples);
                    } catch (const Error &e) {
                        if (!is_degenerate(e)) {
                            throw;
                        }
                        ++report.degenerate_steps;
                    }
                }
                Vector predicted = sample_mean;
                try {
                    const model::Prediction p = model::point_predict(m, rolled, samples);
                    predicted = p.value;
                    report.density_evaluations += p.evaluated;
                    report.violations += p.violations;
                } catch (const Error &e) {
                    if (!is_degenerate(e)) {
                        throw;
                    }
                    report.density_evaluations += samples.size();
                    report.violations += samples.size();
                    ++report.degenerate_steps;
                }
                const Vector truth = seq.row(t + h - 1).transpose();
                const auto slot = static_cast<std::size_t>(h - 1);
                report.mse_curve[slot] += (predicted - truth).squaredNorm() / d;
                report.baseline_curve[slot] += (data_mean - truth).squaredNorm() / d;
                ++report.pair_counts[slot];
            }
            if (discrete) {
                const Vector raw = model::sample_densities(m, state, samples);
                Vector p(raw.size());
                for (Index i = 0; i < raw.size(); ++i) {
                    p(i) = model::classify_density(raw(i)).clamped;
                }
                const double total = p.sum();
                const auto symbol = static_cast<Index>(std::llround(seq(t, 0)));
                require(symbol >= 0 && symbol < p.size(), ErrorCode::kInvalidArgument,
                        "symbol " + std::to_string(symbol) + " is outside the model alphabet");
                const double prob = total > 0.0 ? p(symbol) / total : 0.0;
                nll += -std::log(std::max(prob, std::numeric_limits<double>::min()));
                ++nll_count;
            }
            state = advance(m, state, seq.row(t).transpose(), report.degenerate_steps);
        }
    }
    for (std::size_t h = 0; h < report.mse_curve.size(); ++h) {
        const double n = static_cast<double>(std::max<Index>(report.pair_counts[h], 1));
        report.mse_curve[h] /= n;
        report.baseline_curve[h] /= n;
    }
    report.mse_at_horizon = report.mse_curve.back();
    report.baseline_mse = report.baseline_curve.back();
    if (discrete && nll_count > 0) {
        report.has_perplexity = true;
        report.perplexity = std::exp(nll / static_cast<double>(nll_count));
    }
    report.seconds = seconds_since(start);
    return report;
}

std::string format_report(const EvalReport &r, const model::HqmmModel &m) {
    std::ostringstream out;
    out << "training=" << (m.refined ? "2SR+BPTT" : "2SR-only") << '\n'
        << "mode=" << model::to_string(m.mode) << '\n'
        << "horizon=" << r.horizon << '\n'
        << "pairs=" << r.pair_counts.back() << '\n'
        << "mse_at_horizon=" << format_double(r.mse_at_horizon) << '\n'
        << "baseline_mse=" << format_double(r.baseline_mse) << '\n';
    if (r.has_perplexity) {
        out << "perplexity=" << format_double(r.perplexity) << '\n';
    }
    out << "density_evaluations=" << r.density_evaluations << '\n'
        << "violations=" << r.violations << '\n'
        << "violation_rate=" << format_double(r.violation_rate()) << '\n'
        << "degenerate_steps=" << r.degenerate_steps << '\n';
    return out.str();
}

std::string format_curve_csv(const EvalReport &r) {
    std::ostringstream out;
    out << "horizon,mse,baseline_mse,pairs\n";
    for (std::size_t h = 0; h < r.mse_curve.size(); ++h) {
        out << h + 1 << ',' << format_double(r.mse_curve[h]) << ',' << format_double(r.baseline_curve[h]) << ','
            << r.pair_counts[h] << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

Vector GridSpec::values() const {
    if (steps == 1) {
        return Vector::Constant(1, min);
    }
    return Vector::LinSpaced(steps, min, max);
}

GridSpec parse_grid(const std::string &text) {
    std::stringstream fields(text);
    std::vector<std::string> parts;
    for (std::string f; std::getline(fields, f, ':');) {
        parts.push_back(f);
    }
    require(parts.size() == 3, ErrorCode::kInvalidArgument, "grid must be MIN:MAX:STEPS, got '" + text + "'");
    GridSpec g;
    char *end = nullptr;
    g.min = std::strtod(parts[0].c_str(), &end);
    require(end != parts[0].c_str() && *end == '\0', ErrorCode::kInvalidArgument, "grid MIN is not a number");
    g.max = std::strtod(parts[1].c_str(), &end);
    require(end != parts[1].c_str() && *end == '\0', ErrorCode::kInvalidArgument, "grid MAX is not a number");
    const long long steps = std::strtoll(parts[2].c_str(), &end, 10);
    require(end != parts[2].c_str() && *end == '\0' && steps >= 1, ErrorCode::kInvalidArgument,
            "grid STEPS must be a positive integer");
    require(g.min <= g.max, ErrorCode::kInvalidArgument, "grid MIN must not exceed MAX");
    g.steps = static_cast<Index>(steps);
    return g;
}

Heatmap heatmap(const model::HqmmModel &m, const Matrix &sequence, Index feature_index, const GridSpec &grid) {
    require(feature_index >= 0 && feature_index < m.observation_map.input_dim(), ErrorCode::kInvalidArgument,
            "feature index " + std::to_string(feature_index) + " is out of range");
    require(sequence.cols() == m.observation_map.input_dim(), ErrorCode::kDimensionMismatch,
            "sequence dimension does not match the model");
    const auto states = filter_states(m, sequence);
    Heatmap out;
    out.grid = grid.values();
    out.densities = model::marginal_density_grid(m, states, feature_index, out.grid,
                                                 evenly_spaced(m.prediction_samples, m.config.marginal_draws));
    const auto samples = m.prediction_set();
    out.truth = sequence.col(feature_index);
    out.prediction.resize(sequence.rows());
    for (Index t = 0; t < sequence.rows(); ++t) {
        try {
            out.prediction(t) = model::point_predict(m, states[static_cast<std::size_t>(t)], samples).value(feature_index);
        } catch (const Error &e) {
            if (!is_degenerate(e)) {
                throw;
            }
            out.prediction(t) = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

std::string format_heatmap_csv(const Heatmap &map) {
    std::ostringstream out;
    for (Index g = 0; g < map.grid.size(); ++g) {
        out << format_double(map.grid(g)) << ',';
    }
    out << "truth,prediction\n";
    for (Index t = 0; t < map.densities.rows(); ++t) {
        for (Index g = 0; g < map.grid.size(); ++g) {
            out << format_double(map.densities(t, g)) << ',';
        }
        out << format_double(map.truth(t)) << ',' << format_double(map.prediction(t)) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

BenchRow bench_conditioning(Index n, std::uint64_t seed, double lambda, Index repeats) {
    namespace inference = hqmm::inference;
    namespace features = hqmm::features;
    require(n >= 10 && n % 10 == 0, ErrorCode::kInvalidArgument,
            "bench sample count must be a positive multiple of 10, got " + std::to_string(n));
    require(repeats >= 1, ErrorCode::kInvalidArgument, "repeats must be >= 1");
    // Likelihood with entries in fifths so that each (x, y) cell of n/2
    // points per state holds an exact count.
    Matrix a(2, 2);
    a << 0.8, 0.4, 0.2, 0.6;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.2, 0.8);
    Vector prior(2);
    prior(0) = u(rng);
    prior(1) = 1.0 - prior(0);
    const Index y_query = static_cast<Index>(rng() % 2);

    const features::OneHotMap onehot(2, 1);
    const Index per_state = n / 2;
    Matrix ups(4, n);
    Matrix phi(4, n);
    Vector alpha(n);
    Index col = 0;
    for (Index x = 0; x < 2; ++x) {
        Index placed = 0;
        for (Index y = 0; y < 2; ++y) {
            const Index count = y == 1 ? per_state - placed : static_cast<Index>(std::llround(a(y, x) * per_state));
            for (Index c = 0; c < count; ++c, ++col) {
                ups.col(col) = features::outer_vectorized(onehot.raw(Vector::Constant(1, static_cast<double>(x))));
                phi.col(col) = features::outer_vectorized(onehot.raw(Vector::Constant(1, static_cast<double>(y))));
                alpha(col) = prior(x) / static_cast<double>(per_state);
            }
            placed += count;
        }
    }
    const Vector rho_y = features::outer_vectorized(onehot.raw(Vector::Constant(1, static_cast<double>(y_query))));
    const inference::BeliefWeights prior_weights{alpha};

    Vector nw_embedding;
    double nw_best = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        const Vector kernel_col = phi.transpose() * rho_y;
        const auto posterior = inference::nw_condition(prior_weights, kernel_col);
        nw_embedding = posterior.embedding(ups);
        nw_best = std::min(nw_best, seconds_since(start));
    }
    Vector kbr_embedding;
    double kbr_best = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        const Matrix k_xx = inference::gram(ups, ups);
        const Matrix k_yy = inference::gram(phi, phi);
        const Vector k_col = phi.transpose() * rho_y;
        kbr_embedding = inference::kernel_bayes_rule(ups, k_xx, k_yy, k_col, prior_weights, lambda).vector();
        kbr_best = std::min(kbr_best, seconds_since(start));
    }
    const hqmm::oracle::StochasticMatrix likelihood(a);
    const Vector classical = hqmm::oracle::classical_bayes(likelihood, prior, y_query);
    Vector nw_diag(2);
    Vector kbr_diag(2);
    for (Index x = 0; x < 2; ++x) {
        nw_diag(x) = nw_embedding(x * 2 + x);
        kbr_diag(x) = kbr_embedding(x * 2 + x);
    }
    BenchRow row;
    row.n = n;
    row.nw_seconds = nw_best;
    row.kbr_seconds = kbr_best;
    row.agreement = (nw_embedding - kbr_embedding).cwiseAbs().maxCoeff();
    row.classical_error =
        std::max((nw_diag - classical).cwiseAbs().maxCoeff(), (kbr_diag - classical).cwiseAbs().maxCoeff());
    return row;
}

std::string format_bench_csv(const std::vector<BenchRow> &rows) {
    std::ostringstream out;
    out << "n,nw_seconds,kbr_seconds,ratio,agreement,classical_error\n";
    for (const BenchRow &r : rows) {
        out << r.n << ',' << format_double(r.nw_seconds) << ',' << format_double(r.kbr_seconds) << ','
            << format_double(r.ratio()) << ',' << format_double(r.agreement) << ',' << format_double(r.classical_error)
            << '\n';
    }
    return out.str();
}

}  // namespace harness
