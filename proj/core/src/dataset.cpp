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

#include "hsehqmm/dataset.hpp"

#include <string>

#include "hsehqmm/error.hpp"

namespace hqmm {

Index SequenceDataset::total_steps() const {
    Index total = 0;
    for (const Matrix &s : sequences) {
        total += s.rows();
    }
    return total;
}

void SequenceDataset::add(Matrix sequence, Split which) {
    require(sequence.rows() > 0 && sequence.cols() > 0, ErrorCode::kInvalidArgument, "sequences must be non-empty");
    require(sequences.empty() || sequence.cols() == dim(), ErrorCode::kDimensionMismatch,
            "sequence dimension " + std::to_string(sequence.cols()) + " differs from dataset dimension " +
                std::to_string(dim()));
    sequences.push_back(std::move(sequence));
    split.push_back(which);
}

SequenceDataset SequenceDataset::subset(Split which) const {
    SequenceDataset out;
    out.name = name;
    out.units = units;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        if (split[i] == which) {
            out.sequences.push_back(sequences[i]);
            out.split.push_back(which);
        }
    }
    return out;
}

Matrix SequenceDataset::observations_as_columns() const {
    Matrix out(dim(), total_steps());
    Index col = 0;
    for (const Matrix &s : sequences) {
        out.middleCols(col, s.rows()) = s.transpose();
        col += s.rows();
    }
    return out;
}

void SequenceDataset::validate() const {
    require(!sequences.empty(), ErrorCode::kInvalidArgument, "dataset has no sequences");
    require(split.size() == sequences.size(), ErrorCode::kInvalidArgument, "split assignment size mismatch");
    for (const Matrix &s : sequences) {
        require(s.rows() > 0, ErrorCode::kInvalidArgument, "dataset contains an empty sequence");
        require(s.cols() == dim(), ErrorCode::kDimensionMismatch, "dataset sequences disagree on dimension");
        require(s.allFinite(), ErrorCode::kInvalidArgument, "dataset contains non-finite values");
    }
}

}  // namespace hqmm
