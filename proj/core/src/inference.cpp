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

#include "hsehqmm/inference.hpp"

#include <cmath>
#include <string>

#include "hsehqmm/quantum.hpp"

namespace hqmm::inference {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_finite(const Matrix &m, const char *what) {
    require(m.allFinite(), ErrorCode::kInvalidArgument, std::string(what) + " has non-finite entries");
}

/// Solves (A + lambda I) X = B for symmetric PSD A.
Matrix ridge_solve(const Matrix &a, const Matrix &b, double lambda) {
    require(lambda >= 0.0 && std::isfinite(lambda), ErrorCode::kInvalidArgument, "ridge lambda must be >= 0");
    Matrix regularized = a;
    regularized.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(regularized);
    require(llt.info() == Eigen::Success, ErrorCode::kSingularSystem,
            "regularized system is not positive definite; increase lambda");
    Matrix x = llt.solve(b);
    require(x.allFinite(), ErrorCode::kSingularSystem, "regularized system solve produced non-finite values");
    return x;
}

void require_psd(const Matrix &k, const char *what) {
    require(k.rows() == k.cols(), ErrorCode::kDimensionMismatch, std::string(what) + " must be square");
    require_finite(k, what);
    const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    require((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale, ErrorCode::kNotPositiveSemidefinite,
            std::string(what) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(k, Eigen::EigenvaluesOnly);
    require(solver.eigenvalues().minCoeff() >= -1e-9 * scale, ErrorCode::kNotPositiveSemidefinite,
            std::string(what) + " has negative eigenvalue " + std::to_string(solver.eigenvalues().minCoeff()));
}

}  // namespace

Vector BeliefWeights::embedding(const Matrix &basis) const {
    require(basis.cols() == alpha.size(), ErrorCode::kDimensionMismatch,
            "belief weights have " + std::to_string(alpha.size()) + " entries for " + std::to_string(basis.cols()) +
                " basis columns");
    return basis * alpha;
}

ConditionalOperator::ConditionalOperator(Matrix matrix, double lambda) : matrix_(std::move(matrix)), lambda_(lambda) {
    require_finite(matrix_, "conditional operator");
    require(lambda_ >= 0.0, ErrorCode::kInvalidArgument, "ridge lambda must be >= 0");
}

Vector ConditionalOperator::apply(const Vector &x) const {
    require(x.size() == input_dim(), ErrorCode::kDimensionMismatch,
            "operator input has length " + std::to_string(x.size()) + ", expected " + std::to_string(input_dim()));
    return matrix_ * x;
}

ConditionalOperator fit_conditional(const Matrix &outputs, const Matrix &inputs, double lambda) {
    require(outputs.cols() == inputs.cols(), ErrorCode::kDimensionMismatch,
            "regression needs equal sample counts, got " + std::to_string(outputs.cols()) + " and " +
                std::to_string(inputs.cols()));
    require(inputs.cols() >= 1, ErrorCode::kInvalidArgument, "regression needs at least one sample");
    const Index n = inputs.cols();
    const Index dim = inputs.rows();
    if (dim <= n) {
        // C (U U^T + lambda I) = Phi U^T; solve the transposed system.
        const Matrix lhs = inputs * inputs.transpose();
        const Matrix rhs = inputs * outputs.transpose();
        return ConditionalOperator(ridge_solve(lhs, rhs, lambda).transpose(), lambda);
    }
    require(lambda > 0.0, ErrorCode::kSingularSystem,
            "lambda = 0 with fewer samples than input dimensions is singular; require lambda > 0");
    // C = Phi (U^T U + lambda I)^-1 U^T.
    const Matrix k = inputs.transpose() * inputs;
    const Matrix weights = ridge_solve(k, inputs.transpose(), lambda);
    return ConditionalOperator(outputs * weights, lambda);
}

Vector apply_conditional_dual(const Matrix &outputs, const Matrix &inputs, double lambda, const Vector &x) {
    require(outputs.cols() == inputs.cols(), ErrorCode::kDimensionMismatch, "regression needs equal sample counts");
    require(x.size() == inputs.rows(), ErrorCode::kDimensionMismatch, "query dimension mismatch");
    const Matrix k = inputs.transpose() * inputs;
    const Vector weights = ridge_solve(k, inputs.transpose() * x, lambda);
    return outputs * weights;
}

Matrix gram(const Matrix &a, const Matrix &b) {
    require(a.rows() == b.rows(), ErrorCode::kDimensionMismatch, "Gram matrix operands differ in feature dimension");
    return a.transpose() * b;
}

BeliefWeights kernel_sum_rule(const BeliefWeights &alpha_x, const Matrix &k_xx, const Matrix &k_cross,
                              double lambda) {
    require_psd(k_xx, "Gram matrix");
    require(k_cross.rows() == k_xx.rows() && k_cross.cols() == alpha_x.size(), ErrorCode::kDimensionMismatch,
            "cross Gram matrix shape does not match the Gram matrix and the prior weights");
    return BeliefWeights{ridge_solve(k_xx, k_cross * alpha_x.alpha, lambda)};
}

BeliefWeights nw_condition(const BeliefWeights &alpha_x, const Vector &kernel_col) {
    require(kernel_col.size() == alpha_x.size(), ErrorCode::kDimensionMismatch,
            "kernel column has " + std::to_string(kernel_col.size()) + " entries for " +
                std::to_string(alpha_x.size()) + " weights");
    require(kernel_col.allFinite() && (kernel_col.array() >= 0.0).all(), ErrorCode::kInvalidArgument,
            "Nadaraya-Watson kernel values must be finite and nonnegative");
    Vector weighted = alpha_x.alpha.cwiseProduct(kernel_col);
    const double denominator = weighted.sum();
    require(denominator > kDensityFloor, ErrorCode::kZeroProbability,
            "observation has zero density under the prior (" + std::to_string(denominator) + ")");
    return BeliefWeights{weighted / denominator};
}

features::QuantumMeanMap nw_condition_primal(const Matrix &c_xy_pi, const Vector &rho_y) {
    require(c_xy_pi.cols() == rho_y.size(), ErrorCode::kDimensionMismatch,
            "conditioning matrix has " + std::to_string(c_xy_pi.cols()) + " columns for an observation of length " +
                std::to_string(rho_y.size()));
    const Vector numerator = c_xy_pi * rho_y;
    const features::QuantumMeanMap unnormalized(numerator);
    const double denominator = unnormalized.trace();
    require(denominator > kDensityFloor, ErrorCode::kZeroProbability,
            "observation has zero density (" + std::to_string(denominator) + ")");
    return features::QuantumMeanMap(numerator / denominator);
}

Vector kernel_bayes_weights(const Matrix &k_xx, const Matrix &k_yy, const Vector &k_col, const BeliefWeights &alpha_x,
                            double lambda) {
    const Index n = k_xx.rows();
    require(k_xx.cols() == n && k_yy.rows() == n && k_yy.cols() == n && k_col.size() == n && alpha_x.size() == n,
            ErrorCode::kDimensionMismatch, "kernel Bayes rule inputs must share the sample count");
    require(lambda > 0.0, ErrorCode::kInvalidArgument, "kernel Bayes rule needs lambda > 0");
    const Vector d = ridge_solve(k_xx, k_xx * alpha_x.alpha, lambda);
    const Matrix dk = d.asDiagonal() * k_yy;
    Matrix system = dk * dk;
    system.diagonal().array() += lambda;
    Eigen::PartialPivLU<Matrix> lu(system);
    const Vector inner = lu.solve(d.cwiseProduct(k_col));
    Vector w = dk * inner;
    require(w.allFinite(), ErrorCode::kSingularSystem, "kernel Bayes rule produced non-finite weights");
    return w;
}

features::QuantumMeanMap kernel_bayes_rule(const Matrix &ups, const Matrix &k_xx, const Matrix &k_yy,
                                           const Vector &k_col, const BeliefWeights &alpha_x, double lambda) {
    require(ups.cols() == k_xx.rows(), ErrorCode::kDimensionMismatch, "embedding basis does not match the Gram matrix");
    return features::QuantumMeanMap(ups * kernel_bayes_weights(k_xx, k_yy, k_col, alpha_x, lambda));
}

ConditionalTensor::ConditionalTensor(Matrix data, Index out1, Index out2)
    : data_(std::move(data)), out1_(out1), out2_(out2) {
    require(out1_ >= 1 && out2_ >= 1 && data_.rows() == out1_ * out2_ && data_.cols() >= 1,
            ErrorCode::kDimensionMismatch,
            "tensor data has " + std::to_string(data_.rows()) + " rows, expected " + std::to_string(out1_) + " x " +
                std::to_string(out2_));
}

Matrix contract_mode3(const ConditionalTensor &tensor, const Vector &state) {
    require(state.size() == tensor.in(), ErrorCode::kDimensionMismatch,
            "state has length " + std::to_string(state.size()) + ", tensor mode 3 has " + std::to_string(tensor.in()));
    const Vector flat = tensor.data() * state;
    return Eigen::Map<const RowMajor>(flat.data(), tensor.out1(), tensor.out2());
}

Matrix contract_mode3(const ConditionalTensor &tensor, const features::QuantumMeanMap &state) {
    return contract_mode3(tensor, state.vector());
}

}  // namespace hqmm::inference
