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
#include <variant>
#include <vector>

#include "hsehqmm/dataset.hpp"
#include "hsehqmm/error.hpp"
#include "hsehqmm/linalg.hpp"

/// Feature maps into (finite-dimensional approximations of) an RKHS whose
/// outputs are unit vectors, so that their outer products are pure-state
/// density matrices.
namespace hqmm::features {

/// Random Fourier features for the Gaussian kernel
/// exp(-|x - x'|^2 / (2 sigma^2)): z_i = sqrt(2/D) cos(w_i^T x + b_i) with
/// w_i ~ N(0, sigma^-2 I) and b_i ~ U[0, 2 pi), normalized to unit length.
class RffMap {
  public:
    static RffMap sample(Index input_dim, Index feature_count, double bandwidth, std::uint64_t seed);

    /// Reassembles a previously sampled map (deserialization).
    RffMap(Matrix frequencies, Vector phases, double bandwidth, std::uint64_t seed);

    Index input_dim() const { return frequencies_.cols(); }
    Index feature_count() const { return frequencies_.rows(); }
    double bandwidth() const { return bandwidth_; }
    std::uint64_t seed() const { return seed_; }
    const Matrix &frequencies() const { return frequencies_; }
    const Vector &phases() const { return phases_; }

    /// Unnormalized sqrt(2/D) cos(Wx + b).
    Vector raw(const Vector &x) const;
    Vector embed(const Vector &x) const;
    /// Embeds each column of a d x n matrix.
    Matrix embed_columns(const Matrix &xs) const;

    /// Approximate kernel value embed(x)^T embed(x').
    double kernel(const Vector &x, const Vector &x_prime) const;

  private:
    Matrix frequencies_;
    Vector phases_;
    double bandwidth_;
    std::uint64_t seed_;
};

double gaussian_kernel(const Vector &x, const Vector &x_prime, double bandwidth);

/// Concatenated one-hot encodings of a window of discrete symbols, scaled to
/// unit length. Inputs carry symbol indices as doubles.
class OneHotMap {
  public:
    OneHotMap(Index n_symbols, Index window);

    Index n_symbols() const { return n_symbols_; }
    Index window() const { return window_; }
    Index input_dim() const { return window_; }
    Index feature_count() const { return n_symbols_ * window_; }

    Vector raw(const Vector &x) const;

  private:
    Index n_symbols_;
    Index window_;
};

/// A base map optionally followed by a linear projection; outputs are
/// renormalized to unit length after projecting.
class FeatureMap {
  public:
    using Base = std::variant<RffMap, OneHotMap>;

    explicit FeatureMap(Base base, std::optional<Matrix> projection = std::nullopt);

    const Base &base() const { return base_; }
    const std::optional<Matrix> &projection() const { return projection_; }

    Index input_dim() const;
    Index raw_dim() const;
    Index output_dim() const;

    Vector raw(const Vector &x) const;
    Matrix raw_columns(const Matrix &xs) const;
    Vector embed(const Vector &x) const;
    Matrix embed_columns(const Matrix &xs) const;

  private:
    Base base_;
    std::optional<Matrix> projection_;
};

/// Leading `rank` left singular directions of a raw feature matrix (columns are
/// samples), returned as a rank x raw_dim matrix with deterministic signs.
Matrix principal_basis(const Matrix &raw_features, Index rank);

/// Vectorized density matrix with entries stored column-major (column stacking).
class QuantumMeanMap {
  public:
    explicit QuantumMeanMap(Vector vec_density);

    const Vector &vector() const { return vec_; }
    Index dim() const { return dim_; }
    Matrix density() const;
    double trace() const;

  private:
    Vector vec_;
    Index dim_;
};

/// Columns are unit-norm feature vectors phi(x_i).
struct EmbeddedSample {
    Matrix features;

    explicit EmbeddedSample(Matrix columns, double tol = 1e-9);
    Index count() const { return features.cols(); }
    Index dim() const { return features.rows(); }
    /// Columns vec(phi_i phi_i^T), one per sample.
    Matrix density_columns() const;
};

/// vec(phi phi^T) of a single feature vector.
Vector outer_vectorized(const Vector &phi);

QuantumMeanMap density_feature(const RffMap &map, const Vector &x);
QuantumMeanMap density_feature(const FeatureMap &map, const Vector &x);

/// Empirical quantum mean map (1/n) sum_i vec(phi_i phi_i^T).
QuantumMeanMap mean_map(const EmbeddedSample &embedded);

/// (1/n) sum_i vec(phi_Y_i phi_Y_i^T) vec(ups_X_i ups_X_i^T)^T, an m^2 x n^2 matrix.
Matrix cross_covariance(const EmbeddedSample &phi_y, const EmbeddedSample &ups_x);

/// Median Euclidean distance between consecutive rows of each sequence.
double median_neighbor_distance(const std::vector<Matrix> &sequences);
double median_bandwidth(const SequenceDataset &dataset);

}  // namespace hqmm::features
