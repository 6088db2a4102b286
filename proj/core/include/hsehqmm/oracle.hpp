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
#include <vector>

#include "hsehqmm/quantum.hpp"

/// Brute-force ground truth: classical discrete probability rules, the
/// forward algorithm, and explicit quantum-circuit simulations of the sum rule
/// and Bayes rule. Nothing here is optimized; dimensions are desk scale.
namespace hqmm::oracle {

using quantum::DensityMatrix;
using quantum::UnitaryMatrix;

/// Column-stochastic matrix; column x holds P(Y | X = x).
class StochasticMatrix {
  public:
    explicit StochasticMatrix(Matrix entries, double tol = 1e-12);

    const Matrix &matrix() const { return entries_; }
    Index rows() const { return entries_.rows(); }
    Index cols() const { return entries_.cols(); }

  private:
    Matrix entries_;
};

/// Orthogonal projector (P^2 = P, P^dagger = P).
class ProjectionOperator {
  public:
    explicit ProjectionOperator(CMatrix entries, double tol = quantum::kDefaultTolerances.validation);

    /// I_n kron |y><y| on an n*s composite with the observation register last.
    static ProjectionOperator observation(Index n, Index s, Index y);

    const CMatrix &matrix() const { return entries_; }

  private:
    CMatrix entries_;
};

void validate_probability_vector(const Vector &p, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Classical rules.

Vector classical_sum_rule(const StochasticMatrix &a, const Vector &prior);

/// Posterior P(X | y) via the likelihood row for y.
Vector classical_bayes(const StochasticMatrix &a, const Vector &prior, Index y);

/// Posterior P(X | y) via the joint table renormalized by diag(A prior)^-1.
Vector linear_bayes_form(const StochasticMatrix &a, const Vector &prior, Index y);

/// Discrete HMM with column-stochastic transition T(next, current) and
/// emission O(symbol, state).
struct HiddenMarkovModel {
    Matrix transition;
    Matrix emission;
    Vector initial;

    Index n_states() const { return transition.rows(); }
    Index n_symbols() const { return emission.rows(); }
    void validate() const;
    Vector stationary() const;
};

struct ForwardStep {
    Vector predictive_state;    // P(x_t | y_<t)
    Vector predictive_symbols;  // P(y_t | y_<t)
    Vector posterior_state;     // P(x_t | y_<=t)
    double likelihood;          // P(y_t | y_<t)
};

std::vector<ForwardStep> forward_algorithm(const HiddenMarkovModel &hmm, const std::vector<Index> &observations);

// ---------------------------------------------------------------------------
// Quantum circuits. The environment register is always the second factor and
// is prepared in |0><0|.

/// Unitary on n*m whose action on |x>|0> is sum_y sqrt(A(y,x)) |x>|y>; the
/// remaining columns are a seeded random orthonormal completion.
UnitaryMatrix build_sum_rule_unitary(const StochasticMatrix &a, std::uint64_t completion_seed = 0);

/// Haar-like random unitary from the QR factorization of a complex Gaussian matrix.
UnitaryMatrix random_unitary(Index n, std::uint64_t seed);

/// Random density matrix of given rank (rank = n gives full rank).
DensityMatrix random_density(Index n, Index rank, std::uint64_t seed);

DensityMatrix environment_state(Index s);

/// U (rho_X kron rho_env) U^dagger.
CMatrix joint_after_unitary(const DensityMatrix &rho_x, const UnitaryMatrix &u);

/// tr_X(U (rho_X kron rho_env) U^dagger).
DensityMatrix quantum_sum_rule_circuit(const DensityMatrix &rho_x, const UnitaryMatrix &u1);

/// W: n -> n*s, x -> x kron e_0.
CMatrix environment_embedding(Index n, Index s);

/// V_i = <i|_X kron I_s, the slices whose sandwich sum is tr_X.
std::vector<CMatrix> partial_trace_slices(Index n, Index s);

/// sum_i conj(V_i U W) kron (V_i U W), acting on vec(rho_X).
CMatrix sum_rule_linear_operator(const UnitaryMatrix &u1, const CMatrix &w, const std::vector<CMatrix> &v_slices);

/// Measurement in the computational basis of the environment: tr_env(P J P^dagger), renormalized.
DensityMatrix projective_bayes_circuit(const DensityMatrix &rho_x, const UnitaryMatrix &u2,
                                       const ProjectionOperator &projector);

/// Measurement of an arbitrary rank-1 observation: rotates the environment by
/// the eigenbasis of rho_y, projects with I kron Lambda, rotates back. Checks
/// that the rotated projector collapses to I kron rho_y.
DensityMatrix quantum_bayes_circuit(const DensityMatrix &rho_x, const UnitaryMatrix &u2, const DensityMatrix &rho_y);

/// Same posterior written directly with I kron rho_y in place of the rotated projector.
DensityMatrix collapsed_bayes_circuit(const DensityMatrix &rho_x, const UnitaryMatrix &u2,
                                      const DensityMatrix &rho_y);

/// Reshapes a joint n*s density into the n^2 x s^2 matrix C with
/// C * vec(rho_y) = vec(tr_env((I kron rho_y) J (I kron rho_y))) for rank-1 rho_y.
CMatrix conditioning_matrix(const CMatrix &joint, Index n, Index s);

}  // namespace hqmm::oracle
