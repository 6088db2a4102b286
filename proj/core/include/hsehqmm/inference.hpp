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

#include "hsehqmm/error.hpp"
#include "hsehqmm/features.hpp"
#include "hsehqmm/linalg.hpp"

/// Inference in embedding space: the kernel sum rule, Nadaraya-Watson
/// conditioning and the kernel Bayes rule, each in operator (primal) and
/// Gram-matrix (dual) form where both exist.
///
/// Sample matrices hold one embedded sample per column. Linear systems are
/// solved with lambda added to the diagonal before factorizing.
namespace hqmm::inference {

inline constexpr double kDensityFloor = 1e-12;

/// Weights over the columns of a sample matrix.
struct BeliefWeights {
    Vector alpha;

    Index size() const { return alpha.size(); }
    double total() const { return alpha.sum(); }
    /// sum_i alpha_i * basis.col(i).
    Vector embedding(const Matrix &basis) const;
};

/// Linear map between embedding spaces, C = Phi Ups^T (Ups Ups^T + lambda I)^-1.
class ConditionalOperator {
  public:
    ConditionalOperator(Matrix matrix, double lambda);

    const Matrix &matrix() const { return matrix_; }
    double lambda() const { return lambda_; }
    Index input_dim() const { return matrix_.cols(); }
    Index output_dim() const { return matrix_.rows(); }

    Vector apply(const Vector &x) const;

  private:
    Matrix matrix_;
    double lambda_;
};

/// Ridge regression of `outputs` (columns) onto `inputs` (columns). Solves in
/// whichever of the primal (input dim) or dual (sample count) spaces is
/// smaller. lambda = 0 needs a full-rank system.
ConditionalOperator fit_conditional(const Matrix &outputs, const Matrix &inputs, double lambda);

/// Phi (K + lambda I)^-1 Ups^T x without forming the operator.
Vector apply_conditional_dual(const Matrix &outputs, const Matrix &inputs, double lambda, const Vector &x);

/// Gram matrix a^T b between two column samples.
Matrix gram(const Matrix &a, const Matrix &b);

/// alpha_Y = (K_xx + lambda I)^-1 K_cross alpha_X. K_xx must be symmetric PSD.
BeliefWeights kernel_sum_rule(const BeliefWeights &alpha_x, const Matrix &k_xx, const Matrix &k_cross,
                              double lambda);

/// (alpha_i k_i) / sum_j (alpha_j k_j). Kernel values must be nonnegative.
BeliefWeights nw_condition(const BeliefWeights &alpha_x, const Vector &kernel_col);

/// (C rho_y) / (vec(I)^T C rho_y) for C the conditioning matrix of a joint
/// embedding and rho_y a vectorized rank-1 observation density.
features::QuantumMeanMap nw_condition_primal(const Matrix &c_xy_pi, const Vector &rho_y);

/// Weights w with posterior embedding Ups w, where
/// w = D K_yy ((D K_yy)^2 + lambda I)^-1 D K_:y and
/// D = diag((K_xx + lambda I)^-1 K_xx alpha_X).
Vector kernel_bayes_weights(const Matrix &k_xx, const Matrix &k_yy, const Vector &k_col, const BeliefWeights &alpha_x,
                            double lambda);

features::QuantumMeanMap kernel_bayes_rule(const Matrix &ups, const Matrix &k_xx, const Matrix &k_yy,
                                           const Vector &k_col, const BeliefWeights &alpha_x, double lambda);

/// Three-mode tensor T(i, j, k) stored as an (out1 * out2) x in matrix with
/// row index i * out2 + j.
class ConditionalTensor {
  public:
    ConditionalTensor(Matrix data, Index out1, Index out2);

    const Matrix &data() const { return data_; }
    Matrix &data() { return data_; }
    Index out1() const { return out1_; }
    Index out2() const { return out2_; }
    Index in() const { return data_.cols(); }

    double operator()(Index i, Index j, Index k) const { return data_(i * out2_ + j, k); }

  private:
    Matrix data_;
    Index out1_;
    Index out2_;
};

/// M(i, j) = sum_k T(i, j, k) state(k), an out1 x out2 matrix.
Matrix contract_mode3(const ConditionalTensor &tensor, const Vector &state);
Matrix contract_mode3(const ConditionalTensor &tensor, const features::QuantumMeanMap &state);

}  // namespace hqmm::inference
