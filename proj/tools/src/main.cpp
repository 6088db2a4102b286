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

#include <chrono>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "harness/evaluation.hpp"
#include "harness/io.hpp"
#include "harness/synthetic.hpp"
#include "hsehqmm/learning.hpp"

namespace {

using hqmm::ErrorCode;
using hqmm::Index;
using hqmm::require;
namespace model = hqmm::model;

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::map<std::string, std::string> parse_assignments(const std::vector<std::string> &items) {
    std::map<std::string, std::string> out;
    for (const std::string &item : items) {
        const auto eq = item.find('=');
        require(eq != std::string::npos && eq > 0, ErrorCode::kInvalidArgument,
                "--set expects key=value, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

std::vector<Index> parse_sizes(const std::string &text) {
    std::vector<Index> out;
    std::stringstream fields(text);
    for (std::string f; std::getline(fields, f, ',');) {
        char *end = nullptr;
        const long long v = std::strtoll(f.c_str(), &end, 10);
        require(end != f.c_str() && *end == '\0' && v > 0, ErrorCode::kInvalidArgument,
                "--n expects a comma-separated list of positive integers");
        out.push_back(static_cast<Index>(v));
    }
    require(!out.empty(), ErrorCode::kInvalidArgument, "--n is empty");
    return out;
}

struct GenArgs {
    std::string kind;
    std::vector<std::string> set;
    std::uint64_t seed = 0;
    std::string out;
    std::string test_out;
    std::string params_out;
};

void run_gen(const GenArgs &a) {
    auto params = parse_assignments(a.set);
    if (!a.test_out.empty() && params.count("test_sequences") == 0) {
        params["test_sequences"] = "1";
    }
    const harness::Generated g = harness::gen_synthetic(a.kind, params, a.seed);
    harness::SequenceDataset train = g.data.subset(hqmm::Split::kTrain);
    harness::save_csv(a.out, train);
    if (!a.test_out.empty()) {
        harness::save_csv(a.test_out, g.data.subset(hqmm::Split::kTest));
    }
    if (!a.params_out.empty()) {
        require(!g.description.empty(), ErrorCode::kInvalidArgument,
                "--params-out is only available for the hmm generator");
        harness::write_text(a.params_out, g.description);
    }
}

struct TrainArgs {
    std::string data;
    std::string config;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string mode;
    bool no_bptt = false;
    std::string out;
};

void run_train(const TrainArgs &a) {
    model::HqmmConfig config = a.config.empty() ? model::HqmmConfig{} : harness::load_config(a.config);
    if (a.seed_given) {
        config.seed = a.seed;
    }
    if (!a.mode.empty()) {
        config.mode = model::parse_state_mode(a.mode);
    }
    config.validate();
    const harness::SequenceDataset data = harness::load_csv(a.data);
    auto start = std::chrono::steady_clock::now();
    model::HqmmModel m = hqmm::learning::train_2sr(data, config);
    std::cerr << "2sr_seconds=" << elapsed(start) << '\n';
    if (!a.no_bptt && config.epochs > 0) {
        start = std::chrono::steady_clock::now();
        hqmm::learning::BpttReport report;
        m = hqmm::learning::bptt_refine(m, data, config, &report);
        std::cerr << "bptt_seconds=" << elapsed(start) << '\n';
        if (!report.epoch_loss.empty()) {
            std::cerr << "bptt_first_epoch_loss=" << report.epoch_loss.front() << '\n'
                      << "bptt_last_epoch_loss=" << report.epoch_loss.back() << '\n';
        }
    }
    harness::save_model(a.out, m);
}

struct EvalArgs {
    std::string model;
    std::string data;
    Index horizon = 0;
    std::string out = "-";
    std::string curve_out;
};

void run_evaluate(const EvalArgs &a) {
    const model::HqmmModel m = harness::load_model(a.model);
    const harness::SequenceDataset data = harness::load_csv(a.data);
    const Index horizon = a.horizon > 0 ? a.horizon : m.config.prediction_horizon;
    const harness::EvalReport report = harness::evaluate(m, data, horizon);
    std::cerr << "evaluate_seconds=" << report.seconds << '\n';
    harness::write_text(a.out, harness::format_report(report, m));
    if (!a.curve_out.empty()) {
        harness::write_text(a.curve_out, harness::format_curve_csv(report));
    }
}

struct FilterArgs {
    std::string model;
    std::string data;
    std::string out = "-";
};

void run_filter(const FilterArgs &a) {
    const model::HqmmModel m = harness::load_model(a.model);
    const harness::SequenceDataset data = harness::load_csv(a.data);
    require(data.dim() == m.observation_map.input_dim(), ErrorCode::kDimensionMismatch,
            "dataset dimension does not match the model");
    const auto samples = m.prediction_set();
    std::ostringstream out;
    out << "sequence,t,density,violated";
    for (Index j = 0; j < data.dim(); ++j) {
        out << ",prediction_" << j;
    }
    out << '\n';
    for (Index s = 0; s < data.size(); ++s) {
        const hqmm::Matrix &seq = data.sequences[static_cast<std::size_t>(s)];
        const auto states = harness::filter_states(m, seq);
        for (Index t = 0; t < seq.rows(); ++t) {
            const auto &state = states[static_cast<std::size_t>(t)];
            const auto density = model::observation_density(m, state, seq.row(t).transpose());
            out << s << ',' << t << ',' << harness::format_double(density.raw) << ',' << (density.violated ? 1 : 0);
            const auto p = model::point_predict(m, state, samples);
            for (Index j = 0; j < data.dim(); ++j) {
                out << ',' << harness::format_double(p.value(j));
            }
            out << '\n';
        }
    }
    harness::write_text(a.out, out.str());
}

struct HeatmapArgs {
    std::string model;
    std::string data;
    Index feature = 0;
    Index sequence = 0;
    std::string grid;
    std::string out = "-";
};

void run_heatmap(const HeatmapArgs &a) {
    const model::HqmmModel m = harness::load_model(a.model);
    const harness::SequenceDataset data = harness::load_csv(a.data);
    require(a.sequence >= 0 && a.sequence < data.size(), ErrorCode::kInvalidArgument,
            "--sequence is out of range");
    const auto map = harness::heatmap(m, data.sequences[static_cast<std::size_t>(a.sequence)], a.feature,
                                      harness::parse_grid(a.grid));
    harness::write_text(a.out, harness::format_heatmap_csv(map));
}

struct BenchArgs {
    std::string n = "250,500,1000,2000";
    std::uint64_t seed = 0;
    Index repeats = 3;
    std::string out = "-";
};

void run_bench(const BenchArgs &a) {
    std::vector<harness::BenchRow> rows;
    for (Index n : parse_sizes(a.n)) {
        rows.push_back(harness::bench_conditioning(n, a.seed, 1e-8, a.repeats));
    }
    harness::write_text(a.out, harness::format_bench_csv(rows));
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"HSE-HQMM experiment harness"};
    app.require_subcommand(1);

    GenArgs gen;
    auto *gen_cmd = app.add_subcommand("gen", "Generate a synthetic sequence dataset as CSV");
    gen_cmd->add_option("--kind", gen.kind, "hmm, oscillator or bimodal")->required();
    gen_cmd->add_option("--set", gen.set, "Generator parameter key=value (repeatable)");
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--out", gen.out, "Training CSV path")->required();
    gen_cmd->add_option("--test-out", gen.test_out, "Held-out CSV path");
    gen_cmd->add_option("--params-out", gen.params_out, "Generating HMM parameters (hmm only)");

    TrainArgs train;
    auto *train_cmd = app.add_subcommand("train", "Fit a model by two-stage regression and BPTT");
    train_cmd->add_option("--data", train.data, "Training CSV")->required();
    train_cmd->add_option("--config", train.config, "key=value config file");
    auto *seed_opt = train_cmd->add_option("--seed", train.seed, "Overrides the config seed");
    train_cmd->add_option("--mode", train.mode, "pure or mixed");
    train_cmd->add_flag("--no-bptt", train.no_bptt, "Skip gradient refinement");
    train_cmd->add_option("--out", train.out, "Model file")->required();

    EvalArgs eval;
    auto *eval_cmd = app.add_subcommand("evaluate", "Report multi-step MSE (and perplexity) on a dataset");
    eval_cmd->add_option("--model", eval.model, "Model file")->required();
    eval_cmd->add_option("--data", eval.data, "Evaluation CSV")->required();
    eval_cmd->add_option("--horizon", eval.horizon, "Prediction horizon (default from the model config)");
    eval_cmd->add_option("--out", eval.out, "Report path, '-' for stdout");
    eval_cmd->add_option("--curve-out", eval.curve_out, "Per-horizon MSE CSV");

    FilterArgs filter;
    auto *filter_cmd = app.add_subcommand("filter", "Per-step densities and one-step predictions");
    filter_cmd->add_option("--model", filter.model, "Model file")->required();
    filter_cmd->add_option("--data", filter.data, "CSV to filter")->required();
    filter_cmd->add_option("--out", filter.out, "CSV path, '-' for stdout");

    HeatmapArgs heat;
    auto *heat_cmd = app.add_subcommand("heatmap", "Normalized marginal density grid over time");
    heat_cmd->add_option("--model", heat.model, "Model file")->required();
    heat_cmd->add_option("--data", heat.data, "CSV to filter")->required();
    heat_cmd->add_option("--feature", heat.feature, "Observation coordinate");
    heat_cmd->add_option("--sequence", heat.sequence, "Sequence index within the CSV");
    heat_cmd->add_option("--grid", heat.grid, "MIN:MAX:STEPS")->required();
    heat_cmd->add_option("--out", heat.out, "CSV path, '-' for stdout");

    BenchArgs bench;
    auto *bench_cmd = app.add_subcommand("bench", "Time Nadaraya-Watson against kernel Bayes rule conditioning");
    bench_cmd->add_option("--n", bench.n, "Comma-separated sample counts (multiples of 10)");
    bench_cmd->add_option("--seed", bench.seed, "Random seed");
    bench_cmd->add_option("--repeats", bench.repeats, "Timings per method; the minimum is reported");
    bench_cmd->add_option("--out", bench.out, "CSV path, '-' for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << "error: E_ARG: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*gen_cmd) {
            run_gen(gen);
        } else if (*train_cmd) {
            train.seed_given = seed_opt->count() > 0;
            run_train(train);
        } else if (*eval_cmd) {
            run_evaluate(eval);
        } else if (*filter_cmd) {
            run_filter(filter);
        } else if (*heat_cmd) {
            run_heatmap(heat);
        } else if (*bench_cmd) {
            run_bench(bench);
        }
    } catch (const hqmm::Error &e) {
        std::cerr << "error: " << hqmm::error_code_name(e.code()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: E_INTERNAL: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
