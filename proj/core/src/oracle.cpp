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

#include "hsehqmm/oracle.hpp"

#include <cmath>
#include <random>
#include <string>

namespace hqmm::oracle {

namespace {

constexpr double kZeroProbability = 1e-12;

CVector random_complex_vector(Index n, std::mt19937_64 &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CVector v(n);
    for (Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        v(i) = Complex(re, im);
    }
    return v;
}

Index environment_dim(const DensityMatrix &rho_x, const UnitaryMatrix &u) {
    const Index n = rho_x.dim();
    require(u.dim() % n == 0, ErrorCode::kDimensionMismatch,
            "unitary dim " + std::to_string(u.dim()) + " is not a multiple of state dim " + std::to_string(n));
    return u.dim() / n;
}

DensityMatrix renormalized_system_marginal(const CMatrix &numerator_joint, Index n, Index s) {
    const CMatrix reduced = quantum::partial_trace(numerator_joint, quantum::SubsystemShape({n, s}), 0);
    const double mass = reduced.trace().real();
    require(mass > kZeroProbability, ErrorCode::kZeroProbability,
            "observation has probability " + std::to_string(mass) + " under the circuit");
    CMatrix normalized = reduced / mass;
    normalized = 0.5 * (normalized + normalized.adjoint()).eval();
    return DensityMatrix(std::move(normalized));
}

void require_rank_one(const DensityMatrix &rho_y, double tol) {
    const Vector ev = rho_y.eigenvalues();
    require(std::abs(ev(ev.size() - 1) - 1.0) <= tol, ErrorCode::kInvalidArgument,
            "observation density must be rank 1 with unit trace");
}

}  // namespace

// ---------------------------------------------------------------------------

StochasticMatrix::StochasticMatrix(Matrix entries, double tol) : entries_(std::move(entries)) {
    require(entries_.rows() > 0 && entries_.cols() > 0, ErrorCode::kInvalidArgument, "stochastic matrix is empty");
    require(entries_.minCoeff() >= 0.0, ErrorCode::kInvalidArgument, "stochastic matrix has negative entries");
    for (Index c = 0; c < entries_.cols(); ++c) {
        require(std::abs(entries_.col(c).sum() - 1.0) <= tol, ErrorCode::kInvalidArgument,
                "column " + std::to_string(c) + " of stochastic matrix does not sum to 1");
    }
}

ProjectionOperator::ProjectionOperator(CMatrix entries, double tol) : entries_(std::move(entries)) {
    require(entries_.rows() == entries_.cols(), ErrorCode::kDimensionMismatch, "projector must be square");
    require(quantum::hermitian_defect(entries_) <= tol, ErrorCode::kInvalidArgument, "projector is not Hermitian");
    require((entries_ * entries_ - entries_).cwiseAbs().maxCoeff() <= tol, ErrorCode::kInvalidArgument,
            "projector is not idempotent");
}

ProjectionOperator ProjectionOperator::observation(Index n, Index s, Index y) {
    require(y >= 0 && y < s, ErrorCode::kInvalidArgument, "observation index out of range");
    CMatrix selector = CMatrix::Zero(s, s);
    selector(y, y) = 1.0;
    return ProjectionOperator(quantum::kron(CMatrix(CMatrix::Identity(n, n)), selector));
}

void validate_probability_vector(const Vector &p, double tol) {
    require(p.size() > 0, ErrorCode::kInvalidArgument, "probability vector is empty");
    require(p.minCoeff() >= -tol, ErrorCode::kInvalidArgument, "probability vector has negative entries");
    require(std::abs(p.sum() - 1.0) <= tol, ErrorCode::kInvalidArgument, "probability vector does not sum to 1");
}

// ---------------------------------------------------------------------------

Vector classical_sum_rule(const StochasticMatrix &a, const Vector &prior) {
    require(prior.size() == a.cols(), ErrorCode::kDimensionMismatch, "prior length does not match likelihood columns");
    validate_probability_vector(prior);
    return a.matrix() * prior;
}

Vector classical_bayes(const StochasticMatrix &a, const Vector &prior, Index y) {
    require(prior.size() == a.cols(), ErrorCode::kDimensionMismatch, "prior length does not match likelihood columns");
    require(y >= 0 && y < a.rows(), ErrorCode::kInvalidArgument, "observation index out of range");
    validate_probability_vector(prior);
    const Vector unnormalized = a.matrix().row(y).transpose().asDiagonal() * prior;
    const double evidence = unnormalized.sum();
    require(evidence > kZeroProbability, ErrorCode::kZeroProbability, "observation has zero probability");
    return unnormalized / evidence;
}

Vector linear_bayes_form(const StochasticMatrix &a, const Vector &prior, Index y) {
    require(prior.size() == a.cols(), ErrorCode::kDimensionMismatch, "prior length does not match likelihood columns");
    require(y >= 0 && y < a.rows(), ErrorCode::kInvalidArgument, "observation index out of range");
    validate_probability_vector(prior);
    const Matrix joint = (a.matrix() * prior.asDiagonal()).transpose();
    const Vector marginal = a.matrix() * prior;
    require(marginal(y) > kZeroProbability, ErrorCode::kZeroProbability, "observation has zero probability");
    const Vector indicator = Vector::Unit(a.rows(), y);
    // Zero-probability symbols other than y never reach the selected column.
    Vector inverse = marginal;
    for (Index i = 0; i < inverse.size(); ++i) {
        inverse(i) = marginal(i) > kZeroProbability ? 1.0 / marginal(i) : 0.0;
    }
    return joint * (inverse.asDiagonal() * indicator);
}

void HiddenMarkovModel::validate() const {
    require(transition.rows() == transition.cols(), ErrorCode::kDimensionMismatch, "transition must be square");
    require(emission.cols() == transition.rows(), ErrorCode::kDimensionMismatch,
            "emission columns must equal the number of states");
    require(initial.size() == transition.rows(), ErrorCode::kDimensionMismatch, "initial length mismatch");
    StochasticMatrix check_t(transition, 1e-9);
    StochasticMatrix check_o(emission, 1e-9);
    validate_probability_vector(initial);
}

Vector HiddenMarkovModel::stationary() const {
    const Index n = n_states();
    Matrix system = transition - Matrix::Identity(n, n);
    system.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs(n - 1) = 1.0;
    Vector pi = system.fullPivLu().solve(rhs);
    pi = pi.cwiseMax(0.0);
    return pi / pi.sum();
}

std::vector<ForwardStep> forward_algorithm(const HiddenMarkovModel &hmm, const std::vector<Index> &observations) {
    hmm.validate();
    std::vector<ForwardStep> steps;
    steps.reserve(observations.size());
    Vector predictive = hmm.initial;
    for (Index y : observations) {
        require(y >= 0 && y < hmm.n_symbols(), ErrorCode::kInvalidArgument, "symbol out of range");
        ForwardStep step;
        step.predictive_state = predictive;
        step.predictive_symbols = hmm.emission * predictive;
        const Vector unnormalized = hmm.emission.row(y).transpose().cwiseProduct(predictive);
        step.likelihood = unnormalized.sum();
        require(step.likelihood > kZeroProbability, ErrorCode::kZeroProbability,
                "observed symbol has zero probability under the HMM");
        step.posterior_state = unnormalized / step.likelihood;
        predictive = hmm.transition * step.posterior_state;
        steps.push_back(std::move(step));
    }
    return steps;
}

// ---------------------------------------------------------------------------

UnitaryMatrix build_sum_rule_unitary(const StochasticMatrix &a, std::uint64_t completion_seed) {
    const Index n = a.cols();
    const Index m = a.rows();
    const Index dim = n * m;
    CMatrix u = CMatrix::Zero(dim, dim);
    std::vector<bool> filled(static_cast<std::size_t>(dim), false);
    std::vector<Index> order;
    for (Index x = 0; x < n; ++x) {
        const Index col = x * m;
        for (Index y = 0; y < m; ++y) {
            u(x * m + y, col) = std::sqrt(a.matrix()(y, x));
        }
        filled[static_cast<std::size_t>(col)] = true;
        order.push_back(col);
    }
    std::mt19937_64 rng(completion_seed);
    for (Index col = 0; col < dim; ++col) {
        if (filled[static_cast<std::size_t>(col)]) {
            continue;
        }
        CVector v = random_complex_vector(dim, rng);
        for (int pass = 0; pass < 2; ++pass) {
            for (Index prev : order) {
                v -= u.col(prev).dot(v) * u.col(prev);
            }
        }
        u.col(col) = v / v.norm();
        filled[static_cast<std::size_t>(col)] = true;
        order.push_back(col);
    }
    return UnitaryMatrix(std::move(u));
}

UnitaryMatrix random_unitary(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    CMatrix g(n, n);
    for (Index c = 0; c < n; ++c) {
        g.col(c) = random_complex_vector(n, rng);
    }
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < n; ++i) {
        const Complex d = r(i, i);
        q.col(i) *= d / std::abs(d);
    }
    return UnitaryMatrix(std::move(q));
}

DensityMatrix random_density(Index n, Index rank, std::uint64_t seed) {
    require(rank >= 1 && rank <= n, ErrorCode::kInvalidArgument, "rank must lie in [1, n]");
    std::mt19937_64 rng(seed);
    CMatrix g(n, rank);
    for (Index c = 0; c < rank; ++c) {
        g.col(c) = random_complex_vector(n, rng);
    }
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(std::move(rho));
}

DensityMatrix environment_state(Index s) { return DensityMatrix::basis_state(s, 0); }

CMatrix joint_after_unitary(const DensityMatrix &rho_x, const UnitaryMatrix &u) {
    const Index s = environment_dim(rho_x, u);
    const CMatrix input = quantum::kron(rho_x.matrix(), environment_state(s).matrix());
    return u.matrix() * input * u.matrix().adjoint();
}

DensityMatrix quantum_sum_rule_circuit(const DensityMatrix &rho_x, const UnitaryMatrix &u1) {
    const Index n = rho_x.dim();
    const Index s = environment_dim(rho_x, u1);
    CMatrix reduced = quantum::partial_trace(joint_after_unitary(rho_x, u1), quantum::SubsystemShape({n, s}), 1);
    reduced = 0.5 * (reduced + reduced.adjoint()).eval();
    return DensityMatrix(std::move(reduced));
}

CMatrix environment_embedding(Index n, Index s) {
    CMatrix w = CMatrix::Zero(n * s, n);
    for (Index x = 0; x < n; ++x) {
        w(x * s, x) = 1.0;
    }
    return w;
}

std::vector<CMatrix> partial_trace_slices(Index n, Index s) {
    std::vector<CMatrix> slices;
    slices.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        CMatrix v = CMatrix::Zero(s, n * s);
        for (Index y = 0; y < s; ++y) {
            v(y, i * s + y) = 1.0;
        }
        slices.push_back(std::move(v));
    }
    return slices;
}

CMatrix sum_rule_linear_operator(const UnitaryMatrix &u1, const CMatrix &w, const std::vector<CMatrix> &v_slices) {
    require(!v_slices.empty(), ErrorCode::kInvalidArgument, "need at least one partial-trace slice");
    require(w.rows() == u1.dim(), ErrorCode::kDimensionMismatch, "embedding rows must match unitary dim");
    const Index out = v_slices.front().rows();
    const Index in = w.cols();
    CMatrix a = CMatrix::Zero(out * out, in * in);
    for (const CMatrix &v : v_slices) {
        require(v.cols() == u1.dim() && v.rows() == out, ErrorCode::kDimensionMismatch, "inconsistent slice shape");
        const CMatrix k = v * u1.matrix() * w;
        a += quantum::kron(CMatrix(k.conjugate()), k);
    }
    return a;
}

DensityMatrix projective_bayes_circuit(const DensityMatrix &rho_x, const UnitaryMatrix &u2,
                                       const ProjectionOperator &projector) {
    const Index n = rho_x.dim();
    const Index s = environment_dim(rho_x, u2);
    require(projector.matrix().rows() == u2.dim(), ErrorCode::kDimensionMismatch, "projector dim mismatch");
    const CMatrix joint = joint_after_unitary(rho_x, u2);
    const CMatrix &p = projector.matrix();
    return renormalized_system_marginal(p * joint * p.adjoint(), n, s);
}

DensityMatrix quantum_bayes_circuit(const DensityMatrix &rho_x, const UnitaryMatrix &u2, const DensityMatrix &rho_y) {
    const Index n = rho_x.dim();
    const Index s = environment_dim(rho_x, u2);
    require(rho_y.dim() == s, ErrorCode::kDimensionMismatch, "observation density dim must match environment dim");
    require_rank_one(rho_y, 1e-9);

    // Eigenbasis with the unit eigenvalue first, so Lambda = e_0 e_0^dagger.
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho_y.matrix());
    const CMatrix u_obs = solver.eigenvectors().rowwise().reverse();
    CMatrix lambda = CMatrix::Zero(s, s);
    lambda(0, 0) = 1.0;

    const CMatrix identity_x = CMatrix::Identity(n, n);
    const CMatrix projector = quantum::kron(identity_x, lambda);
    const CMatrix rotate = quantum::kron(identity_x, u_obs);
    const CMatrix rotated_projector = rotate * projector * rotate.adjoint();
    const CMatrix collapsed = quantum::kron(identity_x, rho_y.matrix());
    require((rotated_projector - collapsed).cwiseAbs().maxCoeff() <= 1e-10, ErrorCode::kInvalidArgument,
            "rotated projector does not collapse to I kron rho_y");

    const CMatrix joint = joint_after_unitary(rho_x, u2);
    return renormalized_system_marginal(rotated_projector * joint * rotated_projector.adjoint(), n, s);
}

DensityMatrix collapsed_bayes_circuit(const DensityMatrix &rho_x, const UnitaryMatrix &u2,
                                      const DensityMatrix &rho_y) {
    const Index n = rho_x.dim();
    const Index s = environment_dim(rho_x, u2);
    require(rho_y.dim() == s, ErrorCode::kDimensionMismatch, "observation density dim must match environment dim");
    const CMatrix k = quantum::kron(CMatrix(CMatrix::Identity(n, n)), rho_y.matrix());
    const CMatrix joint = joint_after_unitary(rho_x, u2);
    return renormalized_system_marginal(k * joint * k.adjoint(), n, s);
}

CMatrix conditioning_matrix(const CMatrix &joint, Index n, Index s) {
    require(joint.rows() == n * s && joint.cols() == n * s, ErrorCode::kDimensionMismatch,
            "joint density does not match n*s");
    CMatrix c(n * n, s * s);
    for (Index x = 0; x < n; ++x) {
        for (Index xp = 0; xp < n; ++xp) {
            for (Index a = 0; a < s; ++a) {
                for (Index b = 0; b < s; ++b) {
                    c(x + n * xp, b + s * a) = joint(x * s + a, xp * s + b);
                }
            }
        }
    }
    return c;
}

}  // namespace hqmm::oracle
