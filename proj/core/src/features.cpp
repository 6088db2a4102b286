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

#include "hsehqmm/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hsehqmm/quantum.hpp"

namespace hqmm::features {

namespace {

Vector normalized(Vector v) {
    const double norm = v.norm();
    require(norm > 0.0 && std::isfinite(norm), ErrorCode::kDegenerateState, "feature vector has zero norm");
    return v / norm;
}

Index integer_sqrt(Index n) {
    auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    return r * r == n ? r : -1;
}

}  // namespace

RffMap RffMap::sample(Index input_dim, Index feature_count, double bandwidth, std::uint64_t seed) {
    require(input_dim >= 1, ErrorCode::kInvalidArgument, "RFF input dimension must be >= 1");
    require(feature_count >= 1, ErrorCode::kInvalidArgument, "RFF feature count must be >= 1");
    require(bandwidth > 0.0 && std::isfinite(bandwidth), ErrorCode::kInvalidArgument,
            "RFF bandwidth must be positive, got " + std::to_string(bandwidth));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / bandwidth);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
    Matrix w(feature_count, input_dim);
    for (Index i = 0; i < feature_count; ++i) {
        for (Index j = 0; j < input_dim; ++j) {
            w(i, j) = normal(rng);
        }
    }
    Vector b(feature_count);
    for (Index i = 0; i < feature_count; ++i) {
        b(i) = uniform(rng);
    }
    return RffMap(std::move(w), std::move(b), bandwidth, seed);
}

RffMap::RffMap(Matrix frequencies, Vector phases, double bandwidth, std::uint64_t seed)
    : frequencies_(std::move(frequencies)), phases_(std::move(phases)), bandwidth_(bandwidth), seed_(seed) {
    require(frequencies_.rows() == phases_.size() && frequencies_.rows() > 0, ErrorCode::kDimensionMismatch,
            "RFF frequencies and phases disagree on the feature count");
    require(bandwidth_ > 0.0, ErrorCode::kInvalidArgument, "RFF bandwidth must be positive");
}

Vector RffMap::raw(const Vector &x) const {
    require(x.size() == input_dim(), ErrorCode::kDimensionMismatch,
            "RFF input has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(input_dim()));
    const double scale = std::sqrt(2.0 / static_cast<double>(feature_count()));
    return scale * (frequencies_ * x + phases_).array().cos().matrix();
}

Vector RffMap::embed(const Vector &x) const { return normalized(raw(x)); }

Matrix RffMap::embed_columns(const Matrix &xs) const {
    Matrix out(feature_count(), xs.cols());
    for (Index c = 0; c < xs.cols(); ++c) {
        out.col(c) = embed(xs.col(c));
    }
    return out;
}

double RffMap::kernel(const Vector &x, const Vector &x_prime) const { return embed(x).dot(embed(x_prime)); }

double gaussian_kernel(const Vector &x, const Vector &x_prime, double bandwidth) {
    return std::exp(-(x - x_prime).squaredNorm() / (2.0 * bandwidth * bandwidth));
}

// ---------------------------------------------------------------------------

OneHotMap::OneHotMap(Index n_symbols, Index window) : n_symbols_(n_symbols), window_(window) {
    require(n_symbols_ >= 1 && window_ >= 1, ErrorCode::kInvalidArgument,
            "one-hot map needs at least one symbol and a window of at least one");
}

Vector OneHotMap::raw(const Vector &x) const {
    require(x.size() == window_, ErrorCode::kDimensionMismatch,
            "one-hot input has length " + std::to_string(x.size()) + ", expected " + std::to_string(window_));
    Vector out = Vector::Zero(feature_count());
    for (Index i = 0; i < window_; ++i) {
        const double rounded = std::round(x(i));
        require(std::abs(x(i) - rounded) < 1e-9 && rounded >= 0.0 && rounded < static_cast<double>(n_symbols_),
                ErrorCode::kInvalidArgument, "value " + std::to_string(x(i)) + " is not a valid symbol index");
        out(i * n_symbols_ + static_cast<Index>(rounded)) = 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------

FeatureMap::FeatureMap(Base base, std::optional<Matrix> projection)
    : base_(std::move(base)), projection_(std::move(projection)) {
    if (projection_) {
        require(projection_->cols() == raw_dim() && projection_->rows() >= 1, ErrorCode::kDimensionMismatch,
                "projection columns must equal the raw feature dimension");
    }
}

Index FeatureMap::input_dim() const {
    return std::visit([](const auto &m) { return m.input_dim(); }, base_);
}

Index FeatureMap::raw_dim() const {
    return std::visit([](const auto &m) { return m.feature_count(); }, base_);
}

Index FeatureMap::output_dim() const { return projection_ ? projection_->rows() : raw_dim(); }

Vector FeatureMap::raw(const Vector &x) const {
    return std::visit([&x](const auto &m) { return m.raw(x); }, base_);
}

Matrix FeatureMap::raw_columns(const Matrix &xs) const {
    Matrix out(raw_dim(), xs.cols());
    for (Index c = 0; c < xs.cols(); ++c) {
        out.col(c) = raw(xs.col(c));
    }
    return out;
}

Vector FeatureMap::embed(const Vector &x) const {
    Vector r = raw(x);
    if (projection_) {
        return normalized(*projection_ * r);
    }
    return normalized(std::move(r));
}

Matrix FeatureMap::embed_columns(const Matrix &xs) const {
    Matrix out(output_dim(), xs.cols());
    for (Index c = 0; c < xs.cols(); ++c) {
        out.col(c) = embed(xs.col(c));
    }
    return out;
}

Matrix principal_basis(const Matrix &raw_features, Index rank) {
    const Index dim = raw_features.rows();
    require(rank >= 1 && rank <= dim, ErrorCode::kInvalidArgument, "projection rank must lie in [1, raw dim]");
    Matrix directions(dim, rank);
    if (dim <= raw_features.cols()) {
        const Matrix scatter = raw_features * raw_features.transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> solver(scatter);
        directions = solver.eigenvectors().rightCols(rank).rowwise().reverse();
    } else {
        const Matrix gram = raw_features.transpose() * raw_features;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
        const Index n = gram.rows();
        const double floor = 1e-6 * std::sqrt(std::max(solver.eigenvalues()(n - 1), 0.0));
        Index found = 0;
        for (; found < std::min(rank, n); ++found) {
            const Index src = n - 1 - found;
            const double sigma = std::sqrt(std::max(solver.eigenvalues()(src), 0.0));
            if (!(sigma > floor)) {
                break;
            }
            directions.col(found) = raw_features * solver.eigenvectors().col(src) / sigma;
        }
        // Zero-variance directions: complete with coordinate axes.
        for (Index axis = 0; found < rank && axis < dim; ++axis) {
            Vector v = Vector::Unit(dim, axis);
            for (int pass = 0; pass < 2; ++pass) {
                v -= directions.leftCols(found) * (directions.leftCols(found).transpose() * v);
            }
            const double norm = v.norm();
            if (norm > 1e-6) {
                directions.col(found++) = v / norm;
            }
        }
    }
    for (Index k = 0; k < rank; ++k) {
        Index pivot = 0;
        directions.col(k).cwiseAbs().maxCoeff(&pivot);
        if (directions(pivot, k) < 0.0) {
            directions.col(k) *= -1.0;
        }
    }
    return directions.transpose();
}

// ---------------------------------------------------------------------------

QuantumMeanMap::QuantumMeanMap(Vector vec_density) : vec_(std::move(vec_density)), dim_(integer_sqrt(vec_.size())) {
    require(dim_ > 0, ErrorCode::kDimensionMismatch, "quantum mean map length must be a perfect square");
}

Matrix QuantumMeanMap::density() const { return quantum::unvectorize(vec_); }

double QuantumMeanMap::trace() const { return quantum::trace_functional(dim_).dot(vec_); }

EmbeddedSample::EmbeddedSample(Matrix columns, double tol) : features(std::move(columns)) {
    for (Index c = 0; c < features.cols(); ++c) {
        require(std::abs(features.col(c).norm() - 1.0) <= tol, ErrorCode::kInvalidArgument,
                "embedded sample column " + std::to_string(c) + " is not unit norm");
    }
}

Matrix EmbeddedSample::density_columns() const {
    Matrix out(dim() * dim(), count());
    for (Index c = 0; c < count(); ++c) {
        out.col(c) = outer_vectorized(features.col(c));
    }
    return out;
}

Vector outer_vectorized(const Vector &phi) { return quantum::vectorize(Matrix(phi * phi.transpose())); }

QuantumMeanMap density_feature(const RffMap &map, const Vector &x) {
    return QuantumMeanMap(outer_vectorized(map.embed(x)));
}

QuantumMeanMap density_feature(const FeatureMap &map, const Vector &x) {
    return QuantumMeanMap(outer_vectorized(map.embed(x)));
}

QuantumMeanMap mean_map(const EmbeddedSample &embedded) {
    require(embedded.count() >= 1, ErrorCode::kInvalidArgument, "mean map of an empty sample");
    const Matrix second_moment =
        embedded.features * embedded.features.transpose() / static_cast<double>(embedded.count());
    return QuantumMeanMap(quantum::vectorize(second_moment));
}

Matrix cross_covariance(const EmbeddedSample &phi_y, const EmbeddedSample &ups_x) {
    require(phi_y.count() == ups_x.count(), ErrorCode::kDimensionMismatch,
            "cross-covariance needs equal sample counts, got " + std::to_string(phi_y.count()) + " and " +
                std::to_string(ups_x.count()));
    require(phi_y.count() >= 1, ErrorCode::kInvalidArgument, "cross-covariance of an empty sample");
    return phi_y.density_columns() * ups_x.density_columns().transpose() / static_cast<double>(phi_y.count());
}

double median_neighbor_distance(const std::vector<Matrix> &sequences) {
    std::vector<double> distances;
    for (const Matrix &s : sequences) {
        for (Index t = 0; t + 1 < s.rows(); ++t) {
            distances.push_back((s.row(t + 1) - s.row(t)).norm());
        }
    }
    require(distances.size() >= 2, ErrorCode::kInvalidArgument,
            "median bandwidth needs at least two consecutive observation pairs");
    std::sort(distances.begin(), distances.end());
    auto median_of = [](auto begin, auto end) {
        const auto n = end - begin;
        return n % 2 == 1 ? begin[n / 2] : 0.5 * (begin[n / 2 - 1] + begin[n / 2]);
    };
    const double median = median_of(distances.begin(), distances.end());
    if (median > 0.0) {
        return median;
    }
    // Mostly repeated observations (e.g. sticky symbol chains): use the
    // distances between observations that do change.
    const auto moving = std::upper_bound(distances.begin(), distances.end(), 0.0);
    require(moving != distances.end(), ErrorCode::kDegenerateState,
            "all neighboring distances are zero; supply a bandwidth explicitly");
    return median_of(moving, distances.end());
}

double median_bandwidth(const SequenceDataset &dataset) { return median_neighbor_distance(dataset.sequences); }

}  // namespace hqmm::features
