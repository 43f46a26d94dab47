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

// Dynamic distribution alignment: projected-MMD matrices for the marginal and
// class-conditional terms, the proxy A-distance, and the adaptive factor mu.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "meda/error.hpp"
#include "meda/linalg.hpp"
#include "meda/types.hpp"

namespace meda {

/// Marginal MMD matrix over n source rows followed by m target rows: a a^T with
/// a_i = 1/n on source rows and -1/m on target rows.
inline Matrix build_m0(Index n, Index m) {
    if (n < 1 || m < 1) throw InvalidArgument("marginal MMD matrix needs n >= 1 and m >= 1");
    Vector a(n + m);
    a.head(n).setConstant(1.0 / static_cast<double>(n));
    a.tail(m).setConstant(-1.0 / static_cast<double>(m));
    return a * a.transpose();
}

/// Conditional MMD matrix for one class. `empty()` signals m_c = 0, in which case the
/// matrix is zero and the class contributes nothing to the alignment.
struct ClassAlignment {
    Matrix matrix;
    Index source_count = 0;
    Index target_count = 0;

    bool empty() const { return target_count == 0; }
};

inline ClassAlignment build_mc(const Labels& source_labels, const Labels& target_labels, int c) {
    const Index n = static_cast<Index>(source_labels.size());
    const Index m = static_cast<Index>(target_labels.size());
    ClassAlignment out;
    out.source_count = std::count(source_labels.begin(), source_labels.end(), c);
    out.target_count = std::count(target_labels.begin(), target_labels.end(), c);
    if (out.source_count == 0)
        throw InsufficientDataError("class " + std::to_string(c) + " has no source samples");
    if (out.empty()) {
        out.matrix = Matrix::Zero(n + m, n + m);
        return out;
    }
    Vector a = Vector::Zero(n + m);
    const double ws = 1.0 / static_cast<double>(out.source_count);
    const double wt = -1.0 / static_cast<double>(out.target_count);
    for (Index i = 0; i < n; ++i)
        if (source_labels[i] == c) a(i) = ws;
    for (Index j = 0; j < m; ++j)
        if (target_labels[j] == c) a(n + j) = wt;
    out.matrix = a * a.transpose();
    return out;
}

/// M = (1 - mu) M0 + mu * sum_c Mc.
inline Matrix combine(const Matrix& m0, const std::vector<Matrix>& mc, double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidArgument("adaptive factor must lie in [0, 1]");
    Matrix conditional = Matrix::Zero(m0.rows(), m0.cols());
    for (const Matrix& m : mc) {
        if (m.rows() != m0.rows() || m.cols() != m0.cols())
            throw DimensionError("MMD matrices differ in shape");
        conditional += m;
    }
    return (1.0 - mu) * m0 + mu * conditional;
}

/// 2 (1 - 2 eps), with eps folded to min(eps, 1 - eps) so the result lies in [0, 2].
inline double proxy_a_distance(double error) {
    const double eps = std::clamp(std::min(error, 1.0 - error), 0.0, 0.5);
    return 2.0 * (1.0 - 2.0 * eps);
}

struct DomainDistance {
    double distance = 0.0;
    double error = 0.5;  // held-out balanced error of the domain discriminator
};

namespace detail {

// Row indices ordered by row contents, so that fold assignment does not depend on the
// order samples arrive in. Identical rows are interchangeable.
inline std::vector<Index> canonical_order(const Matrix& x) {
    std::vector<Index> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&x](Index a, Index b) {
        for (Index k = 0; k < x.cols(); ++k)
            if (x(a, k) != x(b, k)) return x(a, k) < x(b, k);
        return false;
    });
    return idx;
}

// Two folds of roughly equal size, assigned after a seeded shuffle.
inline std::vector<int> two_fold_assignment(const Matrix& x, std::uint64_t seed) {
    std::vector<Index> order = canonical_order(x);
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<int> fold(order.size());
    const std::size_t half = (order.size() + 1) / 2;
    for (std::size_t k = 0; k < order.size(); ++k) fold[static_cast<std::size_t>(order[k])] = k < half ? 0 : 1;
    return fold;
}

// Class-balanced ridge regression on targets -1 (domain a) / +1 (domain b) with an
// unpenalized bias. Returns the weight vector with the bias last.
inline Vector fit_ridge_discriminator(const Matrix& a, const Matrix& b) {
    const Index dim = a.cols();
    Matrix gram = Matrix::Zero(dim + 1, dim + 1);
    Vector rhs = Vector::Zero(dim + 1);
    Vector row(dim + 1);
    auto accumulate = [&](const Matrix& x, double target) {
        const double w = 1.0 / static_cast<double>(x.rows());
        for (Index i = 0; i < x.rows(); ++i) {
            row.head(dim) = x.row(i).transpose();
            row(dim) = 1.0;
            gram.noalias() += w * row * row.transpose();
            rhs += w * target * row;
        }
    };
    accumulate(a, -1.0);
    accumulate(b, 1.0);
    const double scale = gram.topLeftCorner(dim, dim).trace() / static_cast<double>(std::max<Index>(dim, 1));
    const double alpha = 1e-3 * scale + 1e-12;
    gram.topLeftCorner(dim, dim).diagonal().array() += alpha;
    return gram.ldlt().solve(rhs);
}

inline double balanced_error(const Vector& w, const Matrix& a, const Matrix& b) {
    const Index dim = a.cols();
    auto miss_rate = [&](const Matrix& x, bool expect_b) {
        Index wrong = 0;
        for (Index i = 0; i < x.rows(); ++i) {
            const double score = x.row(i).dot(w.head(dim)) + w(dim);
            if ((score > 0.0) != expect_b) ++wrong;
        }
        return static_cast<double>(wrong) / static_cast<double>(x.rows());
    };
    return 0.5 * (miss_rate(a, false) + miss_rate(b, true));
}

inline Matrix select_rows(const Matrix& x, const std::vector<int>& fold, int which) {
    std::vector<Index> rows;
    for (std::size_t i = 0; i < fold.size(); ++i)
        if (fold[i] == which) rows.push_back(static_cast<Index>(i));
    Matrix out(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = x.row(rows[k]);
    return out;
}

}  // namespace detail

/// Proxy A-distance between two samples. A linear discriminator is trained on one half of
/// each sample and scored on the other half, then the halves swap; eps is the mean
/// held-out balanced error over both folds.
inline DomainDistance a_distance(const Matrix& a, const Matrix& b, std::uint64_t seed = kDefaultSeed) {
    if (a.rows() < 2 || b.rows() < 2)
        throw InsufficientDataError("A-distance needs at least two samples per domain");
    if (a.cols() != b.cols()) throw DimensionError("A-distance inputs differ in dimension");
    const std::vector<int> fold_a = detail::two_fold_assignment(a, seed);
    const std::vector<int> fold_b = detail::two_fold_assignment(b, seed);
    double error = 0.0;
    for (int held_out = 0; held_out < 2; ++held_out) {
        const Vector w = detail::fit_ridge_discriminator(detail::select_rows(a, fold_a, 1 - held_out),
                                                         detail::select_rows(b, fold_b, 1 - held_out));
        error += 0.5 * detail::balanced_error(w, detail::select_rows(a, fold_a, held_out),
                                              detail::select_rows(b, fold_b, held_out));
    }
    return {proxy_a_distance(error), error};
}

inline DomainDistance a_distance(const FeatureMatrix& a, const FeatureMatrix& b,
                                 std::uint64_t seed = kDefaultSeed) {
    return a_distance(a.data, b.data, seed);
}

struct ADistanceReport {
    double d_marginal = 0.0;
    double marginal_error = 0.5;
    std::vector<double> d_conditional;      // one per class, zero when a side has < 2 samples
    std::vector<double> conditional_errors;
};

struct MuEstimate {
    double mu = 0.5;
    bool degenerate = false;  // no measurable divergence anywhere; mu fell back to 0.5
    ADistanceReport report;
};

/// mu = 1 - d_M / (d_M + sum_c d_c), clamped to [0, 1]. Classes with fewer than two
/// samples on either side contribute d_c = 0.
inline double mu_from_distances(double d_marginal, const std::vector<double>& d_conditional,
                                bool* degenerate = nullptr) {
    const double total = d_marginal + std::accumulate(d_conditional.begin(), d_conditional.end(), 0.0);
    if (degenerate) *degenerate = !(total > 0.0);
    if (!(total > 0.0)) return 0.5;
    return std::clamp(1.0 - d_marginal / total, 0.0, 1.0);
}

inline MuEstimate estimate_mu(const Matrix& z_src, const Labels& source_labels, const Matrix& z_tgt,
                              const Labels& target_labels, std::uint64_t seed = kDefaultSeed) {
    if (static_cast<Index>(source_labels.size()) != z_src.rows() ||
        static_cast<Index>(target_labels.size()) != z_tgt.rows())
        throw DimensionError("labels do not cover the samples");
    const int classes = std::max(class_count(source_labels), class_count(target_labels));

    MuEstimate out;
    const DomainDistance marginal = a_distance(z_src, z_tgt, seed);
    out.report.d_marginal = marginal.distance;
    out.report.marginal_error = marginal.error;

    bool shared = false;
    for (int c = 1; c <= classes; ++c) {
        const Matrix sc = rows_with_label(z_src, source_labels, c);
        const Matrix tc = rows_with_label(z_tgt, target_labels, c);
        shared = shared || (sc.rows() > 0 && tc.rows() > 0);
        DomainDistance dc;
        if (sc.rows() >= 2 && tc.rows() >= 2) dc = a_distance(sc, tc, seed);
        out.report.d_conditional.push_back(dc.distance);
        out.report.conditional_errors.push_back(dc.error);
    }
    if (!shared) throw InsufficientDataError("no class has members in both domains");
    out.mu = mu_from_distances(out.report.d_marginal, out.report.d_conditional, &out.degenerate);
    return out;
}

inline MuEstimate estimate_mu(const FeatureMatrix& z_src, const FeatureMatrix& z_tgt,
                              const Labels& target_labels, std::uint64_t seed = kDefaultSeed) {
    if (!z_src.labels) throw InvalidArgument("source features must be labeled");
    return estimate_mu(z_src.data, *z_src.labels, z_tgt.data, target_labels, seed);
}

}  // namespace meda
