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
#include <random>

#include "hsehqmm/linalg.hpp"
#include "hsehqmm/oracle.hpp"

namespace hqmm::testing {

/// Small seeded generator for property tests.
class Gen {
  public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    Index index(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng_); }
    std::uint64_t seed() { return rng_(); }

    Vector normal_vector(Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) {
            v(i) = normal();
        }
        return v;
    }

    Matrix normal_matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j) {
            m.col(j) = normal_vector(rows);
        }
        return m;
    }

    CMatrix complex_matrix(Index rows, Index cols) {
        CMatrix m(rows, cols);
        for (Index i = 0; i < rows; ++i) {
            for (Index j = 0; j < cols; ++j) {
                m(i, j) = Complex(normal(), normal());
            }
        }
        return m;
    }

    CVector unit_complex(Index n) {
        CMatrix v = complex_matrix(n, 1);
        return v.col(0) / v.norm();
    }

    Vector unit_vector(Index n) {
        Vector v = normal_vector(n);
        return v / v.norm();
    }

    Vector probability(Index n) {
        Vector p(n);
        for (Index i = 0; i < n; ++i) {
            p(i) = uniform(0.05, 1.0);
        }
        return p / p.sum();
    }

    /// Column-stochastic rows x cols matrix with entries bounded away from 0.
    Matrix stochastic(Index rows, Index cols) {
        Matrix a(rows, cols);
        for (Index j = 0; j < cols; ++j) {
            a.col(j) = probability(rows);
        }
        return a;
    }

    /// Real orthogonal matrix from the QR factorization of a Gaussian matrix.
    Matrix orthogonal(Index n) {
        Eigen::HouseholderQR<Matrix> qr(normal_matrix(n, n));
        return qr.householderQ() * Matrix::Identity(n, n);
    }

    std::mt19937_64 &engine() { return rng_; }

  private:
    std::mt19937_64 rng_;
};

inline oracle::HiddenMarkovModel random_hmm(Gen &g, Index states, Index symbols) {
    oracle::HiddenMarkovModel hmm;
    hmm.transition = g.stochastic(states, states);
    hmm.emission = g.stochastic(symbols, states);
    hmm.initial = g.probability(states);
    return hmm;
}

inline double max_abs(const Matrix &m) { return m.cwiseAbs().maxCoeff(); }
inline double max_abs(const CMatrix &m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace hqmm::testing
