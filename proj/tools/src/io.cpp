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

#include "harness/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace harness {

using hqmm::ErrorCode;
using hqmm::fail;
using hqmm::require;
namespace model = hqmm::model;
namespace features = hqmm::features;

namespace {

constexpr const char *kModelHeader = "hsehqmm-model 1";

std::string trim(const std::string &s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool parse_number(const std::string &text, double &out) {
    const std::string t = trim(text);
    if (t.empty()) {
        return false;
    }
    errno = 0;
    char *end = nullptr;
    out = std::strtod(t.c_str(), &end);
    // Underflow to a subnormal or zero is exact enough; overflow is not.
    return end == t.c_str() + t.size() && !(errno == ERANGE && std::isinf(out));
}

Index parse_index(const std::string &key, const std::string &value) {
    double v = 0.0;
    require(parse_number(value, v) && v == static_cast<double>(static_cast<long long>(v)), ErrorCode::kConfig,
            "config key '" + key + "' expects an integer, got '" + value + "'");
    return static_cast<Index>(v);
}

double parse_real(const std::string &key, const std::string &value) {
    double v = 0.0;
    require(parse_number(value, v), ErrorCode::kConfig, "config key '" + key + "' expects a number, got '" + value + "'");
    return v;
}

std::ifstream open_input(const std::string &path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::kIo, "cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string &path) {
    std::ofstream out(path);
    require(out.good(), ErrorCode::kIo, "cannot open '" + path + "' for writing");
    return out;
}

// ---------------------------------------------------------------------------
// Model file tokens.

class Reader {
  public:
    explicit Reader(std::istream &in) : in_(in) {}

    std::vector<std::string> line() {
        std::string text;
        while (std::getline(in_, text)) {
            ++line_no_;
            if (!trim(text).empty()) {
                std::istringstream words(text);
                std::vector<std::string> out;
                for (std::string w; words >> w;) {
                    out.push_back(w);
                }
                return out;
            }
        }
        fail(ErrorCode::kParse, "model file ends early at line " + std::to_string(line_no_));
    }

    std::vector<std::string> expect(const std::string &keyword, std::size_t arity) {
        auto words = line();
        require(!words.empty() && words[0] == keyword && words.size() == arity + 1, ErrorCode::kParse,
                "model file line " + std::to_string(line_no_) + ": expected '" + keyword + "' with " +
                    std::to_string(arity) + " field(s)");
        return words;
    }

    double number(const std::string &text) {
        double v = 0.0;
        require(parse_number(text, v), ErrorCode::kParse,
                "model file line " + std::to_string(line_no_) + ": bad number '" + text + "'");
        return v;
    }

    Index index(const std::string &text) {
        const double v = number(text);
        require(v >= 0.0 && v == static_cast<double>(static_cast<long long>(v)), ErrorCode::kParse,
                "model file line " + std::to_string(line_no_) + ": bad count '" + text + "'");
        return static_cast<Index>(v);
    }

    Matrix matrix(const std::string &name) {
        auto head = expect("matrix", 3);
        require(head[1] == name, ErrorCode::kParse,
                "model file line " + std::to_string(line_no_) + ": expected matrix '" + name + "', got '" + head[1] +
                    "'");
        const Index rows = index(head[2]);
        const Index cols = index(head[3]);
        Matrix m(rows, cols);
        for (Index r = 0; r < rows; ++r) {
            auto values = line();
            require(static_cast<Index>(values.size()) == cols, ErrorCode::kParse,
                    "model file line " + std::to_string(line_no_) + ": expected " + std::to_string(cols) + " values");
            for (Index c = 0; c < cols; ++c) {
                m(r, c) = number(values[static_cast<std::size_t>(c)]);
            }
        }
        return m;
    }

    std::size_t line_no() const { return line_no_; }

  private:
    std::istream &in_;
    std::size_t line_no_ = 0;
};

void write_matrix(std::ostream &out, const std::string &name, const Matrix &m) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            out << (c == 0 ? "" : " ") << format_double(m(r, c));
        }
        out << '\n';
    }
}

void write_map(std::ostream &out, const std::string &name, const std::optional<features::FeatureMap> &map) {
    if (!map) {
        out << "map " << name << " none\n";
        return;
    }
    if (const auto *rff = std::get_if<features::RffMap>(&map->base())) {
        out << "map " << name << " rff\n";
        out << "bandwidth " << format_double(rff->bandwidth()) << '\n';
        out << "seed " << rff->seed() << '\n';
        write_matrix(out, "frequencies", rff->frequencies());
        write_matrix(out, "phases", rff->phases());
    } else {
        const auto &onehot = std::get<features::OneHotMap>(map->base());
        out << "map " << name << " onehot\n";
        out << "symbols " << onehot.n_symbols() << '\n';
        out << "window " << onehot.window() << '\n';
    }
    if (map->projection()) {
        out << "projection 1\n";
        write_matrix(out, "projection", *map->projection());
    } else {
        out << "projection 0\n";
    }
}

std::optional<features::FeatureMap> read_map(Reader &reader, const std::string &name) {
    auto head = reader.expect("map", 2);
    require(head[1] == name, ErrorCode::kParse, "model file: expected map '" + name + "', got '" + head[1] + "'");
    if (head[2] == "none") {
        return std::nullopt;
    }
    std::optional<features::FeatureMap::Base> base;
    if (head[2] == "rff") {
        const double bandwidth = reader.number(reader.expect("bandwidth", 1)[1]);
        const auto seed_text = reader.expect("seed", 1)[1];
        const std::uint64_t seed = std::strtoull(seed_text.c_str(), nullptr, 10);
        Matrix frequencies = reader.matrix("frequencies");
        Vector phases = reader.matrix("phases");
        base = features::RffMap(std::move(frequencies), std::move(phases), bandwidth, seed);
    } else if (head[2] == "onehot") {
        const Index symbols = reader.index(reader.expect("symbols", 1)[1]);
        const Index window = reader.index(reader.expect("window", 1)[1]);
        base = features::OneHotMap(symbols, window);
    } else {
        fail(ErrorCode::kParse, "model file: unknown map kind '" + head[2] + "'");
    }
    const Index has_projection = reader.index(reader.expect("projection", 1)[1]);
    std::optional<Matrix> projection;
    if (has_projection == 1) {
        projection = reader.matrix("projection");
    }
    return features::FeatureMap(std::move(*base), std::move(projection));
}

}  // namespace

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

// ---------------------------------------------------------------------------

SequenceDataset parse_csv(std::istream &in, const std::string &name) {
    SequenceDataset data;
    data.name = name;
    std::vector<std::vector<double>> rows;
    Index width = -1;
    std::size_t line_no = 0;
    auto flush = [&]() {
        if (rows.empty()) {
            return;
        }
        Matrix m(static_cast<Index>(rows.size()), width);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (Index c = 0; c < width; ++c) {
                m(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
            }
        }
        data.add(std::move(m));
        rows.clear();
    };
    std::string text;
    while (std::getline(in, text)) {
        ++line_no;
        if (trim(text).empty()) {
            flush();
            continue;
        }
        std::vector<double> row;
        std::stringstream fields(text);
        for (std::string field; std::getline(fields, field, ',');) {
            double v = 0.0;
            require(parse_number(field, v), ErrorCode::kParse,
                    name + ":" + std::to_string(line_no) + ": non-numeric field '" + trim(field) + "'");
            row.push_back(v);
        }
        if (text.back() == ',') {
            fail(ErrorCode::kParse, name + ":" + std::to_string(line_no) + ": empty trailing field");
        }
        if (width < 0) {
            width = static_cast<Index>(row.size());
        }
        require(static_cast<Index>(row.size()) == width, ErrorCode::kParse,
                name + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields, got " +
                    std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    flush();
    require(data.size() >= 1, ErrorCode::kParse, name + ": no observations");
    return data;
}

SequenceDataset load_csv(const std::string &path) {
    auto in = open_input(path);
    return parse_csv(in, path);
}

void write_csv(std::ostream &out, const SequenceDataset &data) {
    for (Index s = 0; s < data.size(); ++s) {
        if (s > 0) {
            out << '\n';
        }
        const Matrix &m = data.sequences[static_cast<std::size_t>(s)];
        for (Index r = 0; r < m.rows(); ++r) {
            for (Index c = 0; c < m.cols(); ++c) {
                out << (c == 0 ? "" : ",") << format_double(m(r, c));
            }
            out << '\n';
        }
    }
}

void save_csv(const std::string &path, const SequenceDataset &data) {
    auto out = open_output(path);
    write_csv(out, data);
    require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------

void apply_config_entry(model::HqmmConfig &config, const std::string &key, const std::string &value) {
    if (key == "D") {
        config.feature_count = parse_index(key, value);
    } else if (key == "lambda") {
        config.lambda = parse_real(key, value);
    } else if (key == "window") {
        config.window = parse_index(key, value);
    } else if (key == "state_size") {
        config.state_size = parse_index(key, value);
    } else if (key == "lr") {
        config.learning_rate = parse_real(key, value);
    } else if (key == "bptt_horizon") {
        config.bptt_horizon = parse_index(key, value);
    } else if (key == "epochs") {
        config.epochs = parse_index(key, value);
    } else if (key == "batch") {
        config.batch = parse_index(key, value);
    } else if (key == "grad_clip") {
        config.grad_clip = parse_real(key, value);
    } else if (key == "prediction_horizon") {
        config.prediction_horizon = parse_index(key, value);
    } else if (key == "n_density_samples") {
        config.n_density_samples = parse_index(key, value);
    } else if (key == "mode") {
        config.mode = model::parse_state_mode(value);
    } else if (key == "observation") {
        config.observation = model::parse_observation_kind(value);
    } else if (key == "n_symbols") {
        config.n_symbols = parse_index(key, value);
    } else if (key == "hull_samples") {
        config.hull_samples = parse_index(key, value);
    } else if (key == "loss") {
        config.loss = model::parse_loss_kind(value);
    } else if (key == "bandwidth") {
        config.bandwidth = parse_real(key, value);
    } else if (key == "loss_horizon") {
        config.loss_horizon = parse_index(key, value);
    } else if (key == "marginal_draws") {
        config.marginal_draws = parse_index(key, value);
    } else if (key == "seed") {
        const Index seed = parse_index(key, value);
        require(seed >= 0, ErrorCode::kConfig, "config key 'seed' must be nonnegative");
        config.seed = static_cast<std::uint64_t>(seed);
    } else {
        fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
    }
}

model::HqmmConfig parse_config(std::istream &in) {
    model::HqmmConfig config;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        const auto hash = text.find('#');
        const std::string body = trim(hash == std::string::npos ? text : text.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        require(eq != std::string::npos, ErrorCode::kConfig,
                "config line " + std::to_string(line_no) + ": expected key=value");
        apply_config_entry(config, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    }
    config.validate();
    return config;
}

model::HqmmConfig load_config(const std::string &path) {
    auto in = open_input(path);
    return parse_config(in);
}

std::string format_config(const model::HqmmConfig &c) {
    std::ostringstream out;
    out << "D=" << c.feature_count << '\n'
        << "lambda=" << format_double(c.lambda) << '\n'
        << "window=" << c.window << '\n'
        << "state_size=" << c.state_size << '\n'
        << "lr=" << format_double(c.learning_rate) << '\n'
        << "bptt_horizon=" << c.bptt_horizon << '\n'
        << "epochs=" << c.epochs << '\n'
        << "batch=" << c.batch << '\n'
        << "grad_clip=" << format_double(c.grad_clip) << '\n'
        << "prediction_horizon=" << c.prediction_horizon << '\n'
        << "n_density_samples=" << c.n_density_samples << '\n'
        << "mode=" << model::to_string(c.mode) << '\n'
        << "observation=" << model::to_string(c.observation) << '\n'
        << "n_symbols=" << c.n_symbols << '\n'
        << "hull_samples=" << c.hull_samples << '\n'
        << "loss=" << model::to_string(c.loss) << '\n'
        << "loss_horizon=" << c.loss_horizon << '\n'
        << "bandwidth=" << format_double(c.bandwidth) << '\n'
        << "marginal_draws=" << c.marginal_draws << '\n'
        << "seed=" << c.seed << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------

void write_model(std::ostream &out, const model::HqmmModel &m) {
    out << kModelHeader << '\n';
    out << "mode " << model::to_string(m.mode) << '\n';
    out << "training " << (m.refined ? "2SR+BPTT" : "2SR-only") << '\n';
    const std::string config = format_config(m.config);
    const auto lines = static_cast<std::size_t>(std::count(config.begin(), config.end(), '\n'));
    out << "config " << lines << '\n' << config;
    out << "tensor " << m.params.out1() << ' ' << m.params.out2() << '\n';
    write_matrix(out, "data", m.params.data());
    write_map(out, "observation", m.observation_map);
    write_map(out, "history", m.history_map);
    write_map(out, "future", m.future_map);
    write_matrix(out, "initial_state", m.initial_state);
    write_matrix(out, "prediction_samples", m.prediction_samples);
    out << "end\n";
}

model::HqmmModel read_model(std::istream &in) {
    std::string header;
    std::getline(in, header);
    require(trim(header) == kModelHeader, ErrorCode::kParse,
            "not a model file or unsupported version (header '" + trim(header) + "')");
    Reader reader(in);
    const model::StateMode mode = model::parse_state_mode(reader.expect("mode", 1)[1]);
    const std::string training = reader.expect("training", 1)[1];
    require(training == "2SR+BPTT" || training == "2SR-only", ErrorCode::kParse,
            "model file: unknown training tag '" + training + "'");
    const Index config_lines = reader.index(reader.expect("config", 1)[1]);
    std::string config_text;
    for (Index i = 0; i < config_lines; ++i) {
        std::string text;
        require(static_cast<bool>(std::getline(in, text)), ErrorCode::kParse, "model file: truncated config");
        config_text += text + '\n';
    }
    std::istringstream config_stream(config_text);
    model::HqmmConfig config = parse_config(config_stream);
    auto shape = reader.expect("tensor", 2);
    const Index out1 = reader.index(shape[1]);
    const Index out2 = reader.index(shape[2]);
    Matrix data = reader.matrix("data");
    auto observation = read_map(reader, "observation");
    require(observation.has_value(), ErrorCode::kParse, "model file: observation map is required");
    auto history = read_map(reader, "history");
    auto future = read_map(reader, "future");
    Vector initial = reader.matrix("initial_state");
    Matrix samples = reader.matrix("prediction_samples");
    reader.expect("end", 0);
    model::HqmmModel out{
        hqmm::inference::ConditionalTensor(std::move(data), out1, out2),
        std::move(*observation),
        std::move(history),
        std::move(future),
        std::move(initial),
        mode,
        config,
        std::move(samples),
        training == "2SR+BPTT",
    };
    out.validate();
    return out;
}

void save_model(const std::string &path, const model::HqmmModel &model) {
    auto out = open_output(path);
    write_model(out, model);
    require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

model::HqmmModel load_model(const std::string &path) {
    auto in = open_input(path);
    return read_model(in);
}

void write_text(const std::string &path, const std::string &text) {
    if (path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    auto out = open_output(path);
    out << text;
    require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

}  // namespace harness
