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

#include "hsehqmm/error.hpp"
#include "hsehqmm/linalg.hpp"

/// Dense quantum-state primitives: density matrices, Kronecker products,
/// partial traces, column-stacking vectorization, and projection back onto
/// the set of valid density matrices.
///
/// Composite systems are always laid out with the first factor as the slow
/// (outer) index, matching Eigen's kroneckerProduct(a, b).
namespace hqmm::quantum {

struct Tolerances {
    double validation = 1e-9;
    double equivalence = 1e-10;
};

inline constexpr Tolerances kDefaultTolerances{};

class DensityMatrix;

/// Unit-norm vector of probability amplitudes.
class PureState {
  public:
    explicit PureState(CVector amplitudes, double tol = kDefaultTolerances.validation);

    const CVector &amplitudes() const { return amplitudes_; }
    Index dim() const { return amplitudes_.size(); }
    DensityMatrix density() const;

  private:
    CVector amplitudes_;
};

/// Hermitian positive-semidefinite matrix. The default variant also enforces
/// unit trace; the unnormalized variant relaxes only the trace condition.
class DensityMatrix {
  public:
    enum class Normalization { kTraceOne, kUnnormalized };

    explicit DensityMatrix(CMatrix entries, double tol = kDefaultTolerances.validation,
                           Normalization normalization = Normalization::kTraceOne);

    static DensityMatrix maximally_mixed(Index n);
    static DensityMatrix basis_state(Index n, Index k);
    static DensityMatrix diagonal(const Vector &probabilities);

    const CMatrix &matrix() const { return entries_; }
    Index dim() const { return entries_.rows(); }
    Complex trace() const { return entries_.trace(); }
    Normalization normalization() const { return normalization_; }

    /// Eigenvalues in ascending order.
    Vector eigenvalues() const;

  private:
    struct Unchecked {};
    DensityMatrix(CMatrix entries, Unchecked, Normalization normalization);

    friend DensityMatrix project_to_density(const CMatrix &m);
    friend DensityMatrix tensor_product(const DensityMatrix &a, const DensityMatrix &b);

    CMatrix entries_;
    Normalization normalization_;
};

class UnitaryMatrix {
  public:
    explicit UnitaryMatrix(CMatrix entries, double tol = kDefaultTolerances.validation);

    static UnitaryMatrix identity(Index n);

    const CMatrix &matrix() const { return entries_; }
    Index dim() const { return entries_.rows(); }

  private:
    CMatrix entries_;
};

/// Ordered subsystem dimensions of a composite system.
class SubsystemShape {
  public:
    explicit SubsystemShape(std::vector<Index> dims);

    const std::vector<Index> &dims() const { return dims_; }
    Index size() const { return static_cast<Index>(dims_.size()); }
    Index total() const;

  private:
    std::vector<Index> dims_;
};

// ---------------------------------------------------------------------------
// Validation predicates (non-throwing).

double hermitian_defect(const CMatrix &m);
bool is_density_matrix(const CMatrix &m, double tol = kDefaultTolerances.validation);
bool is_unitary(const CMatrix &m, double tol = kDefaultTolerances.validation);

// ---------------------------------------------------------------------------
// Matrix-level operations; these accept unnormalized operands.

CMatrix kron(const CMatrix &a, const CMatrix &b);
Matrix kron(const Matrix &a, const Matrix &b);

/// Reduced matrix of subsystem `keep`, summing out every other subsystem.
CMatrix partial_trace(const CMatrix &m, const SubsystemShape &shape, Index keep);

/// Column-stacking vectorization.
CVector vectorize(const CMatrix &m);
Vector vectorize(const Matrix &m);
CMatrix unvectorize(const CVector &v);
Matrix unvectorize(const Vector &v);

/// vec(I_n); its inner product with vec(M) is trace(M).
Vector trace_functional(Index n);

// ---------------------------------------------------------------------------
// State-level operations.

DensityMatrix tensor_product(const DensityMatrix &a, const DensityMatrix &b);
DensityMatrix partial_trace(const DensityMatrix &rho, const SubsystemShape &shape, Index keep);

/// Applies rho -> U rho U^dagger as the linear map (conj(U) kron U) vec(rho).
CVector apply_unitary_linearized(const UnitaryMatrix &u, const CVector &vectorized_rho);

/// Euclidean projection of a vector onto the probability simplex.
Vector project_to_simplex(const Vector &v);

/// Frobenius-nearest density matrix: Hermitian part, eigendecomposition,
/// eigenvalues projected onto the simplex. Throws kDegenerateState on a zero
/// input.
DensityMatrix project_to_density(const CMatrix &m);

/// Real-symmetric counterpart of project_to_density for real feature states.
Matrix project_to_density(const Matrix &m);

}  // namespace hqmm::quantum
