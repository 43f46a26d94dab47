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

// p-nearest-neighbour cosine affinity graph and its unnormalized Laplacian.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "meda/error.hpp"
#include "meda/types.hpp"

namespace meda {

inline constexpr int kDefaultNeighbors = 10;

struct GraphLaplacian {
    Matrix w;       // symmetric, nonnegative, zero diagonal
    Vector degree;  // row sums of w
    Matrix l;       // diag(degree) - w
    int p = 0;
};

/// W_ij = max(cos(z_i, z_j), 0) when z_i is among the p most similar rows to z_j or the
/// reverse, else 0. Ties at the p-th rank go to the lower row index.
inline Matrix build_affinity(const Matrix& z, int p) {
    const Index n = z.rows();
    if (p < 1 || p >= n)
        throw InvalidArgument("neighbour count " + std::to_string(p) + " must lie in [1, " +
                              std::to_string(n - 1) + "]");
    Matrix unit = z;
    for (Index i = 0; i < n; ++i) {
        const double norm = z.row(i).norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw DegenerateError("row " + std::to_string(i) +
                                  " has zero or non-finite norm; cosine similarity is undefined");
        unit.row(i) /= norm;
    }
    const Matrix sim = unit * unit.transpose();

    Matrix w = Matrix::Zero(n, n);
    std::vector<std::pair<double, Index>> cand(static_cast<std::size_t>(n - 1));
    const auto more_similar = [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    for (Index i = 0; i < n; ++i) {
        std::size_t k = 0;
        for (Index j = 0; j < n; ++j)
            if (j != i) cand[k++] = {sim(i, j), j};
        std::partial_sort(cand.begin(), cand.begin() + p, cand.end(), more_similar);
        for (int r = 0; r < p; ++r) {
            const Index j = cand[static_cast<std::size_t>(r)].second;
            const double v = std::max(0.5 * (sim(i, j) + sim(j, i)), 0.0);
            w(i, j) = v;
            w(j, i) = v;
        }
    }
    return w;
}

/// L = D - W with D_ii = sum_j W_ij.
inline GraphLaplacian build_laplacian(const Matrix& w, int p = 0) {
    if (w.rows() != w.cols()) throw DimensionError("affinity matrix must be square");
    if ((w - w.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw InvalidArgument("affinity matrix must be symmetric");
    if (w.size() && w.minCoeff() < 0.0) throw InvalidArgument("affinity matrix must be nonnegative");
    if (w.diagonal().cwiseAbs().sum() != 0.0)
        throw InvalidArgument("affinity matrix must have a zero diagonal");
    GraphLaplacian g;
    g.w = w;
    g.degree = w.rowwise().sum();
    g.l = -w;
    g.l.diagonal() += g.degree;
    g.p = p;
    return g;
}

inline GraphLaplacian build_graph(const Matrix& z, int p = kDefaultNeighbors) {
    return build_laplacian(build_affinity(z, p), p);
}

}  // namespace meda
