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

#include <gtest/gtest.h>

#include "support.hpp"

using namespace hqmm;
using namespace hqmm::quantum;
using hqmm::testing::Gen;
using hqmm::testing::max_abs;

namespace {

DensityMatrix random_density(Gen &g, Index n, Index rank) {
    CMatrix a = g.complex_matrix(n, rank);
    CMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    return DensityMatrix(rho);
}

CMatrix real_diag(std::initializer_list<double> values) {
    Vector v(static_cast<Index>(values.size()));
    Index i = 0;
    for (double x : values) {
        v(i++) = x;
    }
    return v.cast<Complex>().asDiagonal();
}

}  // namespace

TEST(DensityMatrix, RejectsInvalidEntries) {
    CMatrix not_hermitian(2, 2);
    not_hermitian << 0.5, 0.3, 0.0, 0.5;
    EXPECT_THROW(DensityMatrix{not_hermitian}, Error);
    EXPECT_THROW(DensityMatrix(real_diag({1.5, -0.5})), Error);
    EXPECT_THROW(DensityMatrix(real_diag({0.5, 0.4})), Error);
    EXPECT_NO_THROW(DensityMatrix(real_diag({0.5, 0.4}), 1e-9, DensityMatrix::Normalization::kUnnormalized));
    try {
        DensityMatrix(real_diag({1.5, -0.5}));
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kNotPositiveSemidefinite);
    }
}

TEST(PureState, RequiresUnitNorm) {
    CVector v(2);
    v << 1.0, 1.0;
    EXPECT_THROW(PureState{v}, Error);
    v /= std::sqrt(2.0);
    PureState psi(v);
    EXPECT_NEAR(psi.density().trace().real(), 1.0, 1e-12);
}

TEST(UnitaryMatrix, RejectsNonUnitary) {
    CMatrix m = CMatrix::Identity(2, 2);
    m(0, 1) = 0.1;
    EXPECT_THROW(UnitaryMatrix{m}, Error);
}

TEST(TensorProduct, MaximallyMixed) {
    const auto out = tensor_product(DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(2));
    EXPECT_LE(max_abs(CMatrix(out.matrix() - CMatrix::Identity(4, 4) / 4.0)), 1e-15);
}

TEST(TensorProduct, BasisStatesFirstFactorSlow) {
    const auto out = tensor_product(DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1));
    EXPECT_LE(max_abs(CMatrix(out.matrix() - real_diag({0, 1, 0, 0}))), 1e-15);
}

TEST(TensorProduct, PureFactorsGiveRankOne) {
    Gen g(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = g.index(1, 4);
        const Index m = g.index(1, 4);
        const DensityMatrix a = PureState(g.unit_complex(n)).density();
        const DensityMatrix b = PureState(g.unit_complex(m)).density();
        const DensityMatrix ab = tensor_product(a, b);
        const Vector eig = ab.eigenvalues();
        EXPECT_NEAR(eig.sum(), 1.0, 1e-10);
        EXPECT_NEAR(eig(eig.size() - 1), 1.0, 1e-10);
        EXPECT_LE(eig.head(eig.size() - 1).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(PartialTrace, SeparableStateProperty) {
    Gen g(3);
    for (int trial = 0; trial < 25; ++trial) {
        const Index n = g.index(1, 4);
        const Index m = g.index(1, 4);
        const DensityMatrix a = random_density(g, n, g.index(1, n));
        const DensityMatrix b = random_density(g, m, g.index(1, m));
        const DensityMatrix ab = tensor_product(a, b);
        const SubsystemShape shape({n, m});
        EXPECT_LE(max_abs(CMatrix(partial_trace(ab, shape, 0).matrix() - a.matrix())), 1e-10);
        EXPECT_LE(max_abs(CMatrix(partial_trace(ab, shape, 1).matrix() - b.matrix())), 1e-10);
    }
}

TEST(PartialTrace, BellStateByExplicitSum) {
    CVector bell = CVector::Zero(4);
    bell(0) = 1.0 / std::sqrt(2.0);
    bell(3) = 1.0 / std::sqrt(2.0);
    const CMatrix rho = bell * bell.adjoint();
    // sum_j (I kron <j|) rho (I kron |j>)
    CMatrix expected = CMatrix::Zero(2, 2);
    for (Index j = 0; j < 2; ++j) {
        CMatrix slice = CMatrix::Zero(2, 4);
        slice(0, 0 * 2 + j) = 1.0;
        slice(1, 1 * 2 + j) = 1.0;
        expected += slice * rho * slice.adjoint();
    }
    const CMatrix reduced = partial_trace(rho, SubsystemShape({2, 2}), 0);
    EXPECT_LE(max_abs(CMatrix(reduced - expected)), 1e-15);
    EXPECT_LE(max_abs(CMatrix(reduced - CMatrix::Identity(2, 2) / 2.0)), 1e-15);
}

TEST(PartialTrace, WholeSystemIsTrace) {
    Gen g(5);
    const DensityMatrix rho = random_density(g, 3, 2);
    const CMatrix out = partial_trace(rho.matrix(), SubsystemShape({1, 3}), 0);
    ASSERT_EQ(out.rows(), 1);
    EXPECT_NEAR(out(0, 0).real(), 1.0, 1e-12);
}

TEST(PartialTrace, ThreeFactorsKeepMiddle) {
    Gen g(8);
    const DensityMatrix a = random_density(g, 2, 2);
    const DensityMatrix b = random_density(g, 3, 3);
    const DensityMatrix c = random_density(g, 2, 1);
    const DensityMatrix abc = tensor_product(tensor_product(a, b), c);
    const auto kept = partial_trace(abc, SubsystemShape({2, 3, 2}), 1);
    EXPECT_LE(max_abs(CMatrix(kept.matrix() - b.matrix())), 1e-12);
}

TEST(PartialTrace, ShapeMismatch) {
    try {
        partial_trace(CMatrix(CMatrix::Identity(4, 4)), SubsystemShape({2, 3}), 0);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    }
}

TEST(Vectorize, DiagonalColumnStacking) {
    const double p = 0.3;
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = p;
    d(1, 1) = 1.0 - p;
    const Vector v = vectorize(d);
    Vector expected(4);
    expected << p, 0.0, 0.0, 1.0 - p;
    EXPECT_EQ(v, expected);
}

TEST(Vectorize, RoundTripAndOuterProduct) {
    Gen g(21);
    for (Index n = 1; n <= 8; ++n) {
        const CVector psi = g.unit_complex(n);
        const CMatrix rho = psi * psi.adjoint();
        EXPECT_EQ(unvectorize(vectorize(rho)), rho);
        const CVector expected = kron(CMatrix(psi.conjugate()), CMatrix(psi));
        EXPECT_LE((vectorize(rho) - expected).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Vectorize, RejectsNonSquareLength) {
    EXPECT_THROW(unvectorize(Vector(Vector::Zero(5))), Error);
}

TEST(LinearizedUnitary, IdentityAndSwap) {
    Gen g(4);
    const DensityMatrix rho = random_density(g, 3, 3);
    const CVector v = vectorize(rho.matrix());
    EXPECT_LE((apply_unitary_linearized(UnitaryMatrix::identity(3), v) - v).cwiseAbs().maxCoeff(), 1e-15);

    CMatrix x(2, 2);
    x << 0, 1, 1, 0;
    const CVector out = apply_unitary_linearized(UnitaryMatrix(x), vectorize(CMatrix(real_diag({1, 0}))));
    EXPECT_LE((out - vectorize(CMatrix(real_diag({0, 1})))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LinearizedUnitary, MatchesQuadraticForm) {
    Gen g(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = g.index(1, 6);
        const UnitaryMatrix u = oracle::random_unitary(n, g.seed());
        const DensityMatrix rho = random_density(g, n, g.index(1, n));
        const CVector linear = apply_unitary_linearized(u, vectorize(rho.matrix()));
        const CMatrix quadratic = u.matrix() * rho.matrix() * u.matrix().adjoint();
        EXPECT_LE((linear - vectorize(quadratic)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NEAR(unvectorize(linear).trace().real(), 1.0, 1e-10);
    }
}

TEST(LinearizedUnitary, DimensionMismatch) {
    EXPECT_THROW(apply_unitary_linearized(UnitaryMatrix::identity(2), CVector(CVector::Zero(9))), Error);
}

TEST(SimplexProjection, KnownCases) {
    Vector v(2);
    v << 1.5, -0.5;
    EXPECT_LE((project_to_simplex(v) - Vector::Unit(2, 0)).cwiseAbs().maxCoeff(), 1e-15);
    Vector w(3);
    w << 0.2, 0.2, 0.2;
    EXPECT_LE((project_to_simplex(w) - Vector::Constant(3, 1.0 / 3.0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ProjectToDensity, HandComputedDiagonal) {
    const DensityMatrix out = project_to_density(CMatrix(real_diag({1.5, -0.5})));
    EXPECT_LE(max_abs(CMatrix(out.matrix() - real_diag({1, 0}))), 1e-12);
}

TEST(ProjectToDensity, IdempotentOnValidStates) {
    Gen g(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = g.index(1, 5);
        const DensityMatrix rho = random_density(g, n, g.index(1, n));
        EXPECT_LE(max_abs(CMatrix(project_to_density(rho.matrix()).matrix() - rho.matrix())), 1e-10);
    }
}

TEST(ProjectToDensity, HermitianPartFirst) {
    Gen g(10);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = g.index(1, 5);
        const CMatrix m = g.complex_matrix(n, n);
        const CMatrix h = 0.5 * (m + m.adjoint());
        const DensityMatrix a = project_to_density(m);
        EXPECT_LE(max_abs(CMatrix(a.matrix() - project_to_density(h).matrix())), 1e-10);
        EXPECT_TRUE(is_density_matrix(a.matrix()));
        // Diagonal entries are probabilities.
        const Vector diag = a.matrix().diagonal().real();
        EXPECT_GE(diag.minCoeff(), -1e-9);
        EXPECT_NEAR(diag.sum(), 1.0, 1e-9);
        EXPECT_LE(a.matrix().diagonal().imag().cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ProjectToDensity, NearestAmongRandomCandidates) {
    Gen g(12);
    const CMatrix m = g.complex_matrix(3, 3);
    const CMatrix h = 0.5 * (m + m.adjoint());
    const double best = (project_to_density(m).matrix() - h).norm();
    for (int trial = 0; trial < 200; ++trial) {
        const DensityMatrix candidate = random_density(g, 3, g.index(1, 3));
        EXPECT_GE((candidate.matrix() - h).norm(), best - 1e-12);
    }
}

TEST(ProjectToDensity, ZeroMatrixIsDegenerate) {
    try {
        project_to_density(CMatrix(CMatrix::Zero(3, 3)));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kDegenerateState);
    }
}

TEST(ProjectToDensity, RealVariantMatchesComplex) {
    Gen g(14);
    const Matrix m = g.normal_matrix(4, 4);
    const Matrix real = project_to_density(m);
    const CMatrix complex = project_to_density(CMatrix(m.cast<Complex>())).matrix();
    EXPECT_LE(max_abs(CMatrix(real.cast<Complex>() - complex)), 1e-10);
}
