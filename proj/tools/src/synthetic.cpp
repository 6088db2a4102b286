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

#include "harness/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "harness/io.hpp"

namespace harness {

using hqmm::ErrorCode;
using hqmm::fail;
using hqmm::require;

namespace {

Index sample_categorical(const Vector &p, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = u(rng);
    double acc = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
        acc += p(i);
        if (r < acc) {
            return i;
        }
    }
    return p.size() - 1;
}

Matrix biased_stochastic(Index rows, Index cols, double self_weight, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r) {
            m(r, c) = u(rng) + (r == c % rows ? self_weight : 0.0);
        }
        m.col(c) /= m.col(c).sum();
    }
    return m;
}

double get_real(const std::map<std::string, std::string> &params, const std::string &key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) {
        return fallback;
    }
    char *end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    require(end != it->second.c_str() && *end == '\0', ErrorCode::kInvalidArgument,
            "generator parameter '" + key + "' expects a number, got '" + it->second + "'");
    return v;
}

Index get_index(const std::map<std::string, std::string> &params, const std::string &key, Index fallback) {
    const double v = get_real(params, key, static_cast<double>(fallback));
    require(v >= 1.0 && v == std::floor(v), ErrorCode::kInvalidArgument,
            "generator parameter '" + key + "' expects a positive integer");
    return static_cast<Index>(v);
}

std::vector<double> get_list(const std::map<std::string, std::string> &params, const std::string &key,
                             std::vector<double> fallback) {
    auto it = params.find(key);
    if (it == params.end()) {
        return fallback;
    }
    std::vector<double> out;
    std::stringstream fields(it->second);
    for (std::string f; std::getline(fields, f, ',');) {
        char *end = nullptr;
        const double v = std::strtod(f.c_str(), &end);
        require(end != f.c_str() && *end == '\0', ErrorCode::kInvalidArgument,
                "generator parameter '" + key + "' expects a comma-separated list of numbers");
        out.push_back(v);
    }
    require(!out.empty(), ErrorCode::kInvalidArgument, "generator parameter '" + key + "' is empty");
    return out;
}

void reject_unknown(const std::map<std::string, std::string> &params, const std::set<std::string> &known,
                    const std::string &kind) {
    for (const auto &[key, value] : params) {
        require(known.count(key) == 1, ErrorCode::kInvalidArgument,
                "unknown parameter '" + key + "' for generator '" + kind + "'");
    }
}

}  // namespace

hqmm::oracle::HiddenMarkovModel random_hmm(Index n_states, Index n_symbols, std::uint64_t seed, double self_weight) {
    require(n_states >= 1 && n_symbols >= 1, ErrorCode::kInvalidArgument, "HMM needs at least one state and symbol");
    std::mt19937_64 rng(seed);
    hqmm::oracle::HiddenMarkovModel hmm;
    hmm.transition = biased_stochastic(n_states, n_states, self_weight, rng);
    hmm.emission = biased_stochastic(n_symbols, n_states, self_weight, rng);
    hmm.initial = Vector::Constant(n_states, 1.0 / static_cast<double>(n_states));
    hmm.initial = hmm.stationary();
    hmm.validate();
    return hmm;
}

std::vector<Index> sample_hmm(const hqmm::oracle::HiddenMarkovModel &hmm, Index length, std::uint64_t seed) {
    require(length >= 1, ErrorCode::kInvalidArgument, "sequence length must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(length));
    Index x = sample_categorical(hmm.initial, rng);
    for (Index t = 0; t < length; ++t) {
        out.push_back(sample_categorical(hmm.emission.col(x), rng));
        x = sample_categorical(hmm.transition.col(x), rng);
    }
    return out;
}

HmmData gen_hmm(Index n_states, Index n_symbols, Index length, std::uint64_t seed, Index sequences) {
    require(sequences >= 1, ErrorCode::kInvalidArgument, "need at least one sequence");
    HmmData out{SequenceDataset{}, random_hmm(n_states, n_symbols, seed)};
    out.data.name = "hmm";
    out.data.units = "symbol";
    for (Index s = 0; s < sequences; ++s) {
        const auto symbols = sample_hmm(out.hmm, length, seed + 1 + static_cast<std::uint64_t>(s));
        Matrix m(length, 1);
        for (Index t = 0; t < length; ++t) {
            m(t, 0) = static_cast<double>(symbols[static_cast<std::size_t>(t)]);
        }
        out.data.add(std::move(m));
    }
    return out;
}

SequenceDataset gen_noisy_oscillator(const std::vector<double> &frequencies, double noise, Index dim, Index length,
                                     std::uint64_t seed, Index sequences) {
    require(!frequencies.empty() && dim >= 1 && length >= 1 && sequences >= 1 && noise >= 0.0,
            ErrorCode::kInvalidArgument, "invalid oscillator parameters");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> amplitude(0.5, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto nf = static_cast<Index>(frequencies.size());
    Matrix phases(dim, nf);
    Matrix amplitudes(dim, nf);
    for (Index j = 0; j < dim; ++j) {
        for (Index f = 0; f < nf; ++f) {
            phases(j, f) = phase(rng);
            amplitudes(j, f) = amplitude(rng);
        }
    }
    SequenceDataset data;
    data.name = "oscillator";
    for (Index s = 0; s < sequences; ++s) {
        Matrix m(length, dim);
        const double offset = static_cast<double>(s * length);
        for (Index t = 0; t < length; ++t) {
            for (Index j = 0; j < dim; ++j) {
                double v = 0.0;
                for (Index f = 0; f < nf; ++f) {
                    const double cycles = std::fmod(frequencies[static_cast<std::size_t>(f)] * (offset + t), 1.0);
                    v += amplitudes(j, f) * std::sin(2.0 * std::numbers::pi * cycles + phases(j, f));
                }
                m(t, j) = v + (noise > 0.0 ? noise * gauss(rng) : 0.0);
            }
        }
        data.add(std::move(m));
    }
    return data;
}

SequenceDataset gen_bimodal_switcher(Index length, std::uint64_t seed, const BimodalParams &params, Index sequences) {
    require(params.centers.size() >= 2 && length >= 1 && sequences >= 1, ErrorCode::kInvalidArgument,
            "bimodal switcher needs at least two centres and a positive length");
    require(params.switch_probability >= 0.0 && params.switch_probability <= 1.0 && params.noise >= 0.0,
            ErrorCode::kInvalidArgument, "invalid bimodal switcher parameters");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n_modes = static_cast<Index>(params.centers.size());
    SequenceDataset data;
    data.name = "bimodal";
    for (Index s = 0; s < sequences; ++s) {
        Matrix m(length, 1);
        Index mode = static_cast<Index>(u(rng) * static_cast<double>(n_modes)) % n_modes;
        for (Index t = 0; t < length; ++t) {
            m(t, 0) = params.centers[static_cast<std::size_t>(mode)] + params.noise * gauss(rng);
            if (u(rng) < params.switch_probability) {
                mode = (mode + 1) % n_modes;
            }
        }
        data.add(std::move(m));
    }
    return data;
}

std::string describe_hmm(const hqmm::oracle::HiddenMarkovModel &hmm) {
    std::ostringstream out;
    auto write = [&out](const char *name, const Matrix &m) {
        out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (Index r = 0; r < m.rows(); ++r) {
            for (Index c = 0; c < m.cols(); ++c) {
                out << (c == 0 ? "" : ",") << format_double(m(r, c));
            }
            out << '\n';
        }
    };
    write("transition", hmm.transition);
    write("emission", hmm.emission);
    write("initial", hmm.initial);
    return out.str();
}

Generated gen_synthetic(const std::string &kind, const std::map<std::string, std::string> &params,
                        std::uint64_t seed) {
    const Index train = get_index(params, "sequences", 1);
    const Index test = params.count("test_sequences") == 1 ? get_index(params, "test_sequences", 1) : 0;
    const Index total = train + test;
    Generated out;
    if (kind == "hmm") {
        reject_unknown(params, {"states", "symbols", "T", "sequences", "test_sequences"}, kind);
        auto generated = gen_hmm(get_index(params, "states", 2), get_index(params, "symbols", 2),
                                 get_index(params, "T", 1000), seed, total);
        out = Generated{std::move(generated.data), describe_hmm(generated.hmm)};
    } else if (kind == "oscillator") {
        reject_unknown(params, {"freqs", "noise", "d", "T", "sequences", "test_sequences"}, kind);
        out = Generated{gen_noisy_oscillator(get_list(params, "freqs", {0.05, 0.125}), get_real(params, "noise", 0.1),
                                             get_index(params, "d", 1), get_index(params, "T", 1000), seed, total),
                        ""};
    } else if (kind == "bimodal") {
        reject_unknown(params, {"centers", "switch", "noise", "T", "sequences", "test_sequences"}, kind);
        BimodalParams p;
        p.centers = get_list(params, "centers", p.centers);
        p.switch_probability = get_real(params, "switch", p.switch_probability);
        p.noise = get_real(params, "noise", p.noise);
        out = Generated{gen_bimodal_switcher(get_index(params, "T", 1000), seed, p, total), ""};
    } else {
        fail(ErrorCode::kInvalidArgument, "unknown generator kind '" + kind + "' (expected hmm, oscillator, bimodal)");
    }
    for (Index s = train; s < total; ++s) {
        out.data.split[static_cast<std::size_t>(s)] = hqmm::Split::kTest;
    }
    return out;
}

}  // namespace harness
