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

#include <cmath>

#include <gtest/gtest.h>

#include "hsehqmm/quantum.hpp"
#include "support.hpp"

using namespace hqmm;
using namespace hqmm::features;
using hqmm::testing::Gen;

namespace {

SequenceDataset one_sequence(std::initializer_list<double> values) {
    Matrix s(static_cast<Index>(values.size()), 1);
    Index i = 0;
    for (double v : values) {
        s(i++, 0) = v;
    }
    SequenceDataset data;
    data.add(s);
    return data;
}

}  // namespace

TEST(MedianBandwidth, HandExample) { EXPECT_DOUBLE_EQ(median_bandwidth(one_sequence({0, 1, 3})), 1.5); }

TEST(MedianBandwidth, MostlyRepeatedUsesChangingPairs) {
    // Distances 0, 0, 0, 1, 3: median is zero, changing pairs give 2.
    EXPECT_DOUBLE_EQ(median_bandwidth(one_sequence({4, 4, 4, 4, 5, 2})), 2.0);
}

TEST(MedianBandwidth, ConstantSequenceIsDegenerate) {
    try {
        median_bandwidth(one_sequence({2, 2, 2, 2}));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kDegenerateState);
    }
}

TEST(MedianBandwidth, Homogeneous) {
    Gen g(1);
    for (int trial = 0; trial < 10; ++trial) {
        SequenceDataset data;
        data.add(g.normal_matrix(g.index(3, 30), 2));
        data.add(g.normal_matrix(g.index(3, 30), 2));
        const double c = g.uniform(0.1, 10.0);
        SequenceDataset scaled = data;
        for (Matrix &s : scaled.sequences) {
            s *= c;
        }
        EXPECT_NEAR(median_bandwidth(scaled), c * median_bandwidth(data), 1e-12 * c);
    }
}

TEST(RffMap, SameSeedIsBitIdentical) {
    const RffMap a = RffMap::sample(3, 64, 0.7, 99);
    const RffMap b = RffMap::sample(3, 64, 0.7, 99);
    EXPECT_EQ(a.frequencies(), b.frequencies());
    EXPECT_EQ(a.phases(), b.phases());
    const RffMap c = RffMap::sample(3, 64, 0.7, 100);
    EXPECT_NE(a.frequencies(), c.frequencies());
}

TEST(RffMap, FrequencyVariance) {
    const double sigma = 0.4;
    const RffMap map = RffMap::sample(5, 4000, sigma, 7);
    const Eigen::ArrayXd w = map.frequencies().reshaped().array();
    const double mean = w.mean();
    const double variance = (w - mean).square().sum() / static_cast<double>(w.size() - 1);
    EXPECT_NEAR(variance, 1.0 / (sigma * sigma), 0.1 / (sigma * sigma));
    EXPECT_GE(map.phases().minCoeff(), 0.0);
    EXPECT_LT(map.phases().maxCoeff(), 2.0 * M_PI);
}

TEST(RffMap, SingleFeature) {
    const RffMap map = RffMap::sample(2, 1, 1.0, 3);
    Vector x(2);
    x << 0.1, 0.2;
    EXPECT_NEAR(std::abs(map.embed(x)(0)), 1.0, 1e-12);
}

TEST(RffMap, RejectsBadParameters) {
    EXPECT_THROW(RffMap::sample(2, 10, 0.0, 1), Error);
    EXPECT_THROW(RffMap::sample(2, 10, -1.0, 1), Error);
    EXPECT_THROW(RffMap::sample(2, 0, 1.0, 1), Error);
    const RffMap map = RffMap::sample(2, 10, 1.0, 1);
    EXPECT_THROW(map.embed(Vector::Zero(3)), Error);
}

TEST(RffMap, RawFormula) {
    const RffMap map = RffMap::sample(2, 8, 1.3, 5);
    Vector x(2);
    x << 0.3, -1.1;
    const Vector raw = map.raw(x);
    for (Index i = 0; i < 8; ++i) {
        const double expected = std::sqrt(2.0 / 8.0) * std::cos(map.frequencies().row(i).dot(x) + map.phases()(i));
        EXPECT_NEAR(raw(i), expected, 1e-15);
    }
    EXPECT_LE((map.embed(x) - raw / raw.norm()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RffMap, KernelApproximationError) {
    // Per-pair error of the cos-plus-phase estimator has standard deviation
    // close to 1/sqrt(D) for distant pairs.
    Gen g(8);
    const double sigma = 1.0;
    for (Index features : {1000, 4000}) {
        const RffMap map = RffMap::sample(3, features, sigma, 2024);
        double sum_sq = 0.0;
        for (int pair = 0; pair < 100; ++pair) {
            const Vector x = g.normal_vector(3);
            const Vector y = g.normal_vector(3);
            const double exact = std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
            const double approx = map.kernel(x, y);
            EXPECT_NEAR(map.embed(x).norm(), 1.0, 1e-9);
            EXPECT_LE(std::abs(approx), 1.0 + 1e-12);
            sum_sq += (approx - exact) * (approx - exact);
        }
        EXPECT_LE(std::sqrt(sum_sq / 100.0), 1.5 / std::sqrt(static_cast<double>(features)));
    }
}

TEST(RffMap, KernelSupremumAtLargeFeatureCount) {
    Gen g(9);
    const RffMap map = RffMap::sample(3, 8000, 1.0, 77);
    double worst = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        const Vector x = g.normal_vector(3);
        const Vector y = g.normal_vector(3);
        worst = std::max(worst, std::abs(map.kernel(x, y) - gaussian_kernel(x, y, 1.0)));
    }
    EXPECT_LE(worst, 0.05);
}

TEST(GaussianKernel, Formula) {
    Vector x(2);
    x << 1.0, 2.0;
    Vector y(2);
    y << 0.0, 0.0;
    EXPECT_NEAR(gaussian_kernel(x, y, 2.0), std::exp(-5.0 / 8.0), 1e-15);
}

TEST(DensityFeature, RankOneTraceOne) {
    Gen g(9);
    const RffMap map = RffMap::sample(2, 20, 0.8, 4);
    for (int trial = 0; trial < 10; ++trial) {
        const QuantumMeanMap q = density_feature(map, g.normal_vector(2));
        EXPECT_NEAR(q.trace(), 1.0, 1e-12);
        EXPECT_NEAR(q.vector().squaredNorm(), 1.0, 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(q.density());
        EXPECT_NEAR(eig.eigenvalues()(19), 1.0, 1e-10);
        EXPECT_LE(eig.eigenvalues().head(19).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(DensityFeature, InnerProductIsSquaredKernel) {
    Gen g(10);
    const RffMap map = RffMap::sample(2, 50, 0.8, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = g.normal_vector(2);
        const Vector y = g.normal_vector(2);
        const double k = map.embed(x).dot(map.embed(y));
        const double dk = density_feature(map, x).vector().dot(density_feature(map, y).vector());
        EXPECT_NEAR(dk, k * k, 1e-10);
        EXPECT_GE(dk, 0.0);
    }
}

TEST(OneHotMap, ConcatenatedUnitScaled) {
    const OneHotMap map(3, 2);
    Vector x(2);
    x << 2, 0;
    Vector expected = Vector::Zero(6);
    expected(2) = 1.0;
    expected(3) = 1.0;
    expected /= std::sqrt(2.0);
    EXPECT_LE((FeatureMap(map).embed(x) - expected).cwiseAbs().maxCoeff(), 1e-15);
    Vector bad(2);
    bad << 3, 0;
    EXPECT_THROW(map.raw(bad), Error);
}

TEST(FeatureMap, ProjectionRenormalizes) {
    Gen g(12);
    const RffMap base = RffMap::sample(1, 30, 1.0, 6);
    const Matrix xs = g.normal_matrix(1, 200);
    const FeatureMap raw_map(base);
    const Matrix basis = principal_basis(raw_map.raw_columns(xs), 5);
    EXPECT_LE((basis * basis.transpose() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
    const FeatureMap projected(base, basis);
    EXPECT_EQ(projected.output_dim(), 5);
    const Matrix e = projected.embed_columns(xs);
    EXPECT_LE((e.colwise().norm().array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(FeatureMap, RankDeficientBasisIsCompleted) {
    Gen g(14);
    // Fewer samples than features, all on a line through the origin.
    const Vector u = g.normal_vector(12);
    Matrix raw(12, 6);
    for (Index c = 0; c < 6; ++c) {
        raw.col(c) = g.normal() * u;
    }
    const Matrix basis = principal_basis(raw, 8);
    EXPECT_LE((basis * basis.transpose() - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(std::abs(basis.row(0).dot(u.normalized())), 1.0, 1e-10);
}

TEST(MeanMap, SingleSampleEqualsDensityFeature) {
    Gen g(13);
    const RffMap map = RffMap::sample(2, 10, 1.0, 8);
    const Vector x = g.normal_vector(2);
    Matrix col = map.embed(x);
    const QuantumMeanMap m = mean_map(EmbeddedSample(col));
    EXPECT_LE((m.vector() - density_feature(map, x).vector()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MeanMap, OrthogonalPairHasHalfEigenvalues) {
    Matrix cols = Matrix::Zero(3, 2);
    cols(0, 0) = 1.0;
    cols(1, 1) = 1.0;
    const Matrix rho = mean_map(EmbeddedSample(cols)).density();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(rho);
    EXPECT_NEAR(eig.eigenvalues()(0), 0.0, 1e-15);
    EXPECT_NEAR(eig.eigenvalues()(1), 0.5, 1e-15);
    EXPECT_NEAR(eig.eigenvalues()(2), 0.5, 1e-15);
}

TEST(MeanMap, TraceOneProperty) {
    Gen g(14);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = g.index(1, 8);
        const Index n = g.index(1, 15);
        Matrix cols(d, n);
        for (Index j = 0; j < n; ++j) {
            cols.col(j) = g.unit_vector(d);
        }
        const QuantumMeanMap m = mean_map(EmbeddedSample(cols));
        EXPECT_NEAR(m.trace(), 1.0, 1e-9);
        EXPECT_TRUE(quantum::is_density_matrix(CMatrix(m.density().cast<Complex>())));
    }
}

TEST(MeanMap, EmptyAndNonUnitInputs) {
    EXPECT_THROW(mean_map(EmbeddedSample(Matrix(3, 0))), Error);
    EXPECT_THROW(EmbeddedSample(Matrix::Ones(2, 2)), Error);
}

TEST(CrossCovariance, SingleSampleIsOuterProduct) {
    Gen g(15);
    Matrix y = g.unit_vector(3);
    Matrix x = g.unit_vector(2);
    const Matrix c = cross_covariance(EmbeddedSample(y), EmbeddedSample(x));
    ASSERT_EQ(c.rows(), 9);
    ASSERT_EQ(c.cols(), 4);
    const Matrix expected = outer_vectorized(y.col(0)) * outer_vectorized(x.col(0)).transpose();
    EXPECT_LE((c - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CrossCovariance, IdenticalColumnsRankOne) {
    Gen g(16);
    const Vector a = g.unit_vector(3);
    const Vector b = g.unit_vector(3);
    const Matrix ys = a.replicate(1, 6);
    const Matrix xs = b.replicate(1, 6);
    Eigen::JacobiSVD<Matrix> svd(cross_covariance(EmbeddedSample(ys), EmbeddedSample(xs)));
    EXPECT_GT(svd.singularValues()(0), 0.5);
    EXPECT_LE(svd.singularValues()(1), 1e-12);
}

TEST(CrossCovariance, SymmetricInputIsPsd) {
    Gen g(17);
    Matrix cols(3, 10);
    for (Index j = 0; j < 10; ++j) {
        cols.col(j) = g.unit_vector(3);
    }
    const EmbeddedSample s(cols);
    const Matrix c = cross_covariance(s, s);
    EXPECT_LE((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
}

TEST(CrossCovariance, CountMismatch) {
    EXPECT_THROW(cross_covariance(EmbeddedSample(Matrix::Identity(2, 2)), EmbeddedSample(Matrix::Identity(3, 3))),
                 Error);
}

TEST(EmbeddedSample, DensityColumnsMatchOuterProducts) {
    Gen g(18);
    Matrix cols(4, 3);
    for (Index j = 0; j < 3; ++j) {
        cols.col(j) = g.unit_vector(4);
    }
    const Matrix d = EmbeddedSample(cols).density_columns();
    for (Index j = 0; j < 3; ++j) {
        const Matrix outer = cols.col(j) * cols.col(j).transpose();
        EXPECT_LE((d.col(j) - quantum::vectorize(outer)).cwiseAbs().maxCoeff(), 1e-15);
    }
}
