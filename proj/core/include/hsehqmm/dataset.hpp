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

#include <string>
#include <vector>

#include "hsehqmm/linalg.hpp"

namespace hqmm {

enum class Split { kTrain, kTest };

/// Ordered real-valued observation sequences. Each sequence is a T x d matrix
/// with one observation per row.
struct SequenceDataset {
    std::vector<Matrix> sequences;
    std::vector<Split> split;
    std::string name;
    std::string units;

    Index dim() const { return sequences.empty() ? 0 : sequences.front().cols(); }
    Index size() const { return static_cast<Index>(sequences.size()); }
    Index total_steps() const;

    /// Adds a sequence, checking its dimension against the existing ones.
    void add(Matrix sequence, Split which = Split::kTrain);

    /// Sequences assigned to one side of the split.
    SequenceDataset subset(Split which) const;

    /// Stacks every observation as a column of a d x N matrix.
    Matrix observations_as_columns() const;

    void validate() const;
};

}  // namespace hqmm
