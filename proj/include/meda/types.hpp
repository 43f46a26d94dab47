/*
 * Copyright 2026 The meda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "meda/error.hpp"

namespace meda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Class labels are 1-based: {1..C}.
using Labels = std::vector<int>;

inline constexpr std::uint64_t kDefaultSeed = 20180722;

enum class Domain { source, target };

inline const char* to_string(Domain d) { return d == Domain::source ? "source" : "target"; }

/// Samples are rows. Target matrices carry labels only when they hold pseudo-labels or
/// held-out ground truth.
struct FeatureMatrix {
    Matrix data;
    Domain domain = Domain::source;
    std::optional<Labels> labels;

    Index rows() const { return data.rows(); }
    Index dim() const { return data.cols(); }
    bool has_labels() const { return labels.has_value(); }

    /// Throws DimensionError if labels exist and do not match the row count.
    void check() const {
        if (labels && static_cast<Index>(labels->size()) != data.rows())
            throw DimensionError("label count " + std::to_string(labels->size()) +
                                 " does not match row count " + std::to_string(data.rows()));
    }
};

/// Largest label value, i.e. C for labels in {1..C}. Zero for an empty set.
inline int class_count(const Labels& labels) {
    int c = 0;
    for (int y : labels) c = std::max(c, y);
    return c;
}

/// Source rows first, then target rows.
inline Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
    if (top.cols() != bottom.cols())
        throw DimensionError("cannot stack matrices with " + std::to_string(top.cols()) +
                             " and " + std::to_string(bottom.cols()) + " columns");
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

/// Rows of `x` whose label equals `c`.
inline Matrix rows_with_label(const Matrix& x, const Labels& labels, int c) {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == c) idx.push_back(static_cast<Index>(i));
    Matrix out(static_cast<Index>(idx.size()), x.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = x.row(idx[k]);
    return out;
}

/// Row-wise argmax; ties go to the lowest column. Returns 1-based labels.
inline Labels argmax_labels(const Matrix& scores) {
    Labels out(static_cast<std::size_t>(scores.rows()), 1);
    for (Index i = 0; i < scores.rows(); ++i) {
        Index best = 0;
        for (Index c = 1; c < scores.cols(); ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        out[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
    }
    return out;
}

}  // namespace meda
