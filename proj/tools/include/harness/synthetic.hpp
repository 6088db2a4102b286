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
#include <map>
#include <string>
#include <vector>

#include "hsehqmm/dataset.hpp"
#include "hsehqmm/oracle.hpp"

/// Seeded synthetic sequence generators standing in for real corpora.
namespace harness {

using hqmm::Index;
using hqmm::Matrix;
using hqmm::SequenceDataset;
using hqmm::Vector;

/// Random HMM whose transition and emission columns put `self_weight` extra
/// mass on the diagonal before normalizing; starts from its stationary law.
hqmm::oracle::HiddenMarkovModel random_hmm(Index n_states, Index n_symbols, std::uint64_t seed,
                                           double self_weight = 2.0);

std::vector<Index> sample_hmm(const hqmm::oracle::HiddenMarkovModel &hmm, Index length, std::uint64_t seed);

struct HmmData {
    SequenceDataset data;
    hqmm::oracle::HiddenMarkovModel hmm;
};

/// `sequences` chains of `length` symbols (stored as doubles, d = 1).
HmmData gen_hmm(Index n_states, Index n_symbols, Index length, std::uint64_t seed, Index sequences = 1);

/// Sum of sinusoids per dimension with random phases and amplitudes in
/// [0.5, 1], plus Gaussian noise.
SequenceDataset gen_noisy_oscillator(const std::vector<double> &frequencies, double noise, Index dim, Index length,
                                     std::uint64_t seed, Index sequences = 1);

struct BimodalParams {
    std::vector<double> centers{1.5, -0.5};
    /// Probability of switching to the other centre at each step.
    double switch_probability = 0.3;
    double noise = 0.1;
};

/// One-dimensional Markov switching between centres with Gaussian noise.
SequenceDataset gen_bimodal_switcher(Index length, std::uint64_t seed, const BimodalParams &params = {},
                                     Index sequences = 1);

/// Generic entry point used by the CLI: kind is hmm, oscillator or bimodal;
/// params are string key/value pairs (see the README for keys).
struct Generated {
    SequenceDataset data;
    std::string description;
};

Generated gen_synthetic(const std::string &kind, const std::map<std::string, std::string> &params, std::uint64_t seed);

std::string describe_hmm(const hqmm::oracle::HiddenMarkovModel &hmm);

}  // namespace harness
