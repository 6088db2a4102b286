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

#include <iosfwd>
#include <string>

#include "hsehqmm/dataset.hpp"
#include "hsehqmm/model.hpp"

namespace harness {

using hqmm::Index;
using hqmm::Matrix;
using hqmm::SequenceDataset;
using hqmm::Vector;

/// Shortest decimal text that reads back to the same double (%.17g).
std::string format_double(double value);

/// One observation per line as comma-separated decimals; a blank line ends a
/// sequence. Errors carry the 1-based line number.
SequenceDataset parse_csv(std::istream &in, const std::string &name = "stdin");
SequenceDataset load_csv(const std::string &path);
void write_csv(std::ostream &out, const SequenceDataset &data);
void save_csv(const std::string &path, const SequenceDataset &data);

/// Flat key=value text with '#' comments. Omitted keys keep their defaults;
/// unknown keys are rejected.
hqmm::model::HqmmConfig parse_config(std::istream &in);
hqmm::model::HqmmConfig load_config(const std::string &path);
/// Applies a single key=value assignment.
void apply_config_entry(hqmm::model::HqmmConfig &config, const std::string &key, const std::string &value);
std::string format_config(const hqmm::model::HqmmConfig &config);

/// Versioned text model file: header line, then named sections carrying
/// dimensions and row-major %.17g values.
void write_model(std::ostream &out, const hqmm::model::HqmmModel &model);
hqmm::model::HqmmModel read_model(std::istream &in);
void save_model(const std::string &path, const hqmm::model::HqmmModel &model);
hqmm::model::HqmmModel load_model(const std::string &path);

/// Writes text to a path, or to stdout when the path is "-".
void write_text(const std::string &path, const std::string &text);

}  // namespace harness
