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

#include "hsehqmm/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace hqmm::quantum {

namespace {

constexpr double kZeroMatrixThreshold = 1e-14;

std::string dims_str(Index rows, Index cols) { return std::to_string(rows) + "x" + std::to_string(cols); }

void require_square(const CMatrix &m, const char *what) {
    require(m.rows() == m.cols() && m.rows() > 0, ErrorCode::kDimensionMismatch,
            std::string(what) + " must be a non-empty square matrix, got " + dims_str(m.rows(), m.cols()));
}

Index integer_sqrt(Index n) {
    auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    return r * r == n ? r : -1;
}

}  // namespace

// ---------------------------------------------------------------------------

PureState::PureState(CVector amplitudes, double tol) : amplitudes_(std::move(amplitudes)) {
    require(amplitudes_.size() > 0, ErrorCode::kInvalidArgument, "pure state must be non-empty");
    require(std::abs(amplitudes_.squaredNorm() - 1.0) <= tol, ErrorCode::kInvalidArgument,
            "pure state amplitudes must have unit norm, got squared norm " +
                std::to_string(amplitudes_.squaredNorm()));
}

DensityMatrix PureState::density() const { return DensityMatrix(amplitudes_ * amplitudes_.adjoint()); }

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(CMatrix entries, double tol, Normalization normalization)
    : entries_(std::move(entries)), normalization_(normalization) {
    require_square(entries_, "density matrix");
    require(hermitian_defect(entries_) <= tol, ErrorCode::kInvalidArgument, "density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(entries_, Eigen::EigenvaluesOnly);
    require(solver.eigenvalues().minCoeff() >= -tol, ErrorCode::kNotPositiveSemidefinite,
            "density matrix has eigenvalue " + std::to_string(solver.eigenvalues().minCoeff()));
    if (normalization_ == Normalization::kTraceOne) {
        require(std::abs(entries_.trace() - Complex(1.0, 0.0)) <= tol, ErrorCode::kInvalidArgument,
                "density matrix trace must be 1, got " + std::to_string(entries_.trace().real()));
    }
}

DensityMatrix::DensityMatrix(CMatrix entries, Unchecked, Normalization normalization)
    : entries_(std::move(entries)), normalization_(normalization) {}

DensityMatrix DensityMatrix::maximally_mixed(Index n) {
    require(n >= 1, ErrorCode::kInvalidArgument, "dimension must be >= 1");
    return DensityMatrix(CMatrix::Identity(n, n) / static_cast<double>(n), Unchecked{}, Normalization::kTraceOne);
}

DensityMatrix DensityMatrix::basis_state(Index n, Index k) {
    require(n >= 1 && k >= 0 && k < n, ErrorCode::kInvalidArgument, "basis index out of range");
    CMatrix m = CMatrix::Zero(n, n);
    m(k, k) = 1.0;
    return DensityMatrix(std::move(m), Unchecked{}, Normalization::kTraceOne);
}

DensityMatrix DensityMatrix::diagonal(const Vector &probabilities) {
    return DensityMatrix(CMatrix(probabilities.cast<Complex>().asDiagonal()));
}

Vector DensityMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(entries_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

// ---------------------------------------------------------------------------

UnitaryMatrix::UnitaryMatrix(CMatrix entries, double tol) : entries_(std::move(entries)) {
    require_square(entries_, "unitary");
    require(is_unitary(entries_, tol), ErrorCode::kInvalidArgument, "matrix is not unitary");
}

UnitaryMatrix UnitaryMatrix::identity(Index n) { return UnitaryMatrix(CMatrix::Identity(n, n)); }

SubsystemShape::SubsystemShape(std::vector<Index> dims) : dims_(std::move(dims)) {
    require(!dims_.empty(), ErrorCode::kInvalidArgument, "subsystem shape must list at least one dimension");
    for (Index d : dims_) {
        require(d >= 1, ErrorCode::kInvalidArgument, "subsystem dimensions must be >= 1");
    }
}

Index SubsystemShape::total() const {
    return std::accumulate(dims_.begin(), dims_.end(), Index{1}, std::multiplies<>());
}

// ---------------------------------------------------------------------------

double hermitian_defect(const CMatrix &m) {
    if (m.rows() != m.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_density_matrix(const CMatrix &m, double tol) {
    if (m.rows() != m.cols() || m.rows() == 0 || hermitian_defect(m) > tol) {
        return false;
    }
    if (std::abs(m.trace() - Complex(1.0, 0.0)) > tol) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -tol;
}

bool is_unitary(const CMatrix &m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    CMatrix defect = m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols());
    return defect.cwiseAbs().maxCoeff() <= tol;
}

CMatrix kron(const CMatrix &a, const CMatrix &b) { return Eigen::kroneckerProduct(a, b).eval(); }

Matrix kron(const Matrix &a, const Matrix &b) { return Eigen::kroneckerProduct(a, b).eval(); }

CMatrix partial_trace(const CMatrix &m, const SubsystemShape &shape, Index keep) {
    require(keep >= 0 && keep < shape.size(), ErrorCode::kDimensionMismatch, "subsystem index out of range");
    require(m.rows() == m.cols() && m.rows() == shape.total(), ErrorCode::kDimensionMismatch,
            "matrix " + dims_str(m.rows(), m.cols()) + " does not match subsystem shape of total dimension " +
                std::to_string(shape.total()));
    const auto &dims = shape.dims();
    Index left = 1;
    Index right = 1;
    for (Index i = 0; i < shape.size(); ++i) {
        if (i < keep) {
            left *= dims[i];
        } else if (i > keep) {
            right *= dims[i];
        }
    }
    const Index kept = dims[keep];
    CMatrix out = CMatrix::Zero(kept, kept);
    for (Index i = 0; i < kept; ++i) {
        for (Index j = 0; j < kept; ++j) {
            Complex acc = 0.0;
            for (Index l = 0; l < left; ++l) {
                for (Index r = 0; r < right; ++r) {
                    acc += m((l * kept + i) * right + r, (l * kept + j) * right + r);
                }
            }
            out(i, j) = acc;
        }
    }
    return out;
}

CVector vectorize(const CMatrix &m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

Vector vectorize(const Matrix &m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

CMatrix unvectorize(const CVector &v) {
    const Index n = integer_sqrt(v.size());
    require(n > 0, ErrorCode::kDimensionMismatch, "vector length " + std::to_string(v.size()) + " is not a square");
    return Eigen::Map<const CMatrix>(v.data(), n, n);
}

Matrix unvectorize(const Vector &v) {
    const Index n = integer_sqrt(v.size());
    require(n > 0, ErrorCode::kDimensionMismatch, "vector length " + std::to_string(v.size()) + " is not a square");
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

Vector trace_functional(Index n) { return vectorize(Matrix(Matrix::Identity(n, n))); }

// ---------------------------------------------------------------------------

DensityMatrix tensor_product(const DensityMatrix &a, const DensityMatrix &b) {
    const bool normalized = a.normalization() == DensityMatrix::Normalization::kTraceOne &&
                            b.normalization() == DensityMatrix::Normalization::kTraceOne;
    return DensityMatrix(kron(a.matrix(), b.matrix()), DensityMatrix::Unchecked{},
                         normalized ? DensityMatrix::Normalization::kTraceOne
                                    : DensityMatrix::Normalization::kUnnormalized);
}

DensityMatrix partial_trace(const DensityMatrix &rho, const SubsystemShape &shape, Index keep) {
    return DensityMatrix(partial_trace(rho.matrix(), shape, keep), kDefaultTolerances.validation,
                         rho.normalization());
}

CVector apply_unitary_linearized(const UnitaryMatrix &u, const CVector &vectorized_rho) {
    const Index n = u.dim();
    require(vectorized_rho.size() == n * n, ErrorCode::kDimensionMismatch,
            "vectorized state of length " + std::to_string(vectorized_rho.size()) + " does not match unitary of dim " +
                std::to_string(n));
    return kron(CMatrix(u.matrix().conjugate()), u.matrix()) * vectorized_rho;
}

Vector project_to_simplex(const Vector &v) {
    require(v.size() > 0, ErrorCode::kInvalidArgument, "cannot project an empty vector onto the simplex");
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double running = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        running += sorted[j];
        const double candidate = (running - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) {
            theta = candidate;
        }
    }
    return (v.array() - theta).max(0.0).matrix();
}

DensityMatrix project_to_density(const CMatrix &m) {
    require_square(m, "matrix to project");
    const CMatrix hermitian = 0.5 * (m + m.adjoint());
    require(hermitian.cwiseAbs().maxCoeff() > kZeroMatrixThreshold, ErrorCode::kDegenerateState,
            "cannot project a zero matrix onto the density matrices");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian);
    const Vector weights = project_to_simplex(solver.eigenvalues());
    CMatrix rebuilt = solver.eigenvectors() * weights.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
    rebuilt = 0.5 * (rebuilt + rebuilt.adjoint()).eval();
    return DensityMatrix(std::move(rebuilt), DensityMatrix::Unchecked{}, DensityMatrix::Normalization::kTraceOne);
}

Matrix project_to_density(const Matrix &m) {
    require(m.rows() == m.cols() && m.rows() > 0, ErrorCode::kDimensionMismatch, "matrix to project must be square");
    const Matrix symmetric = 0.5 * (m + m.transpose());
    require(symmetric.cwiseAbs().maxCoeff() > kZeroMatrixThreshold, ErrorCode::kDegenerateState,
            "cannot project a zero matrix onto the density matrices");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
    const Vector weights = project_to_simplex(solver.eigenvalues());
    Matrix rebuilt = solver.eigenvectors() * weights.asDiagonal() * solver.eigenvectors().transpose();
    return 0.5 * (rebuilt + rebuilt.transpose());
}

}  // namespace hqmm::quantum
