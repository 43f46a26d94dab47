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

// Closed-form classifier learning on manifold features with dynamic distribution
// alignment and Laplacian regularization, iterated over target pseudo-labels.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "meda/alignment.hpp"
#include "meda/error.hpp"
#include "meda/graph.hpp"
#include "meda/linalg.hpp"
#include "meda/types.hpp"

namespace meda {

/// RBF entries are exp(-||u - v||^2 / (2 * bandwidth)); `bandwidth` is the variance
/// sigma^2. Left unset, it resolves to the mean per-feature variance of the training rows.
struct KernelSpec {
    enum class Kind { rbf, linear };
    Kind kind = Kind::rbf;
    std::optional<double> bandwidth;

    bool resolved() const { return kind == Kind::linear || bandwidth.has_value(); }
};

inline const char* to_string(KernelSpec::Kind k) { return k == KernelSpec::Kind::rbf ? "rbf" : "linear"; }

inline KernelSpec resolve_kernel(const KernelSpec& spec, const Matrix& z) {
    KernelSpec out = spec;
    if (out.kind == KernelSpec::Kind::rbf && !out.bandwidth) {
        const Matrix centered = z.rowwise() - z.colwise().mean();
        const double var = centered.squaredNorm() /
                           (static_cast<double>(z.rows()) * static_cast<double>(z.cols()));
        out.bandwidth = var;
    }
    if (out.kind == KernelSpec::Kind::rbf && !(*out.bandwidth > 0.0 && std::isfinite(*out.bandwidth)))
        throw DegenerateError("RBF bandwidth resolved to a non-positive value");
    return out;
}

/// Kernel between the rows of `a` and the rows of `b`.
inline Matrix cross_kernel(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
    if (!spec.resolved()) throw InvalidArgument("kernel bandwidth is not resolved");
    if (a.cols() != b.cols())
        throw DimensionError("kernel inputs have " + std::to_string(a.cols()) + " and " +
                             std::to_string(b.cols()) + " features");
    Matrix k = a * b.transpose();
    if (spec.kind == KernelSpec::Kind::linear) return k;
    const Vector na = a.rowwise().squaredNorm();
    const Vector nb = b.rowwise().squaredNorm();
    const double scale = -0.5 / *spec.bandwidth;
    for (Index j = 0; j < k.cols(); ++j)
        for (Index i = 0; i < k.rows(); ++i)
            k(i, j) = std::exp(scale * std::max(na(i) + nb(j) - 2.0 * k(i, j), 0.0));
    return k;
}

inline Matrix kernel_matrix(const Matrix& z, const KernelSpec& spec) {
    Matrix k = cross_kernel(z, z, spec);
    k = symmetrized(k);
    if (spec.kind == KernelSpec::Kind::rbf) k.diagonal().setOnes();
    return k;
}

/// Diagonal domain indicator: ones on the first n (source) rows.
inline Matrix build_indicator(Index n, Index m) {
    if (n < 1 || m < 0) throw InvalidArgument("indicator needs n >= 1 and m >= 0");
    Vector diag = Vector::Zero(n + m);
    diag.head(n).setOnes();
    return diag.asDiagonal();
}

/// One-hot label rows for the source block; target rows stay zero.
inline Matrix one_hot_rows(const Labels& source_labels, Index target_count, int classes) {
    const Index n = static_cast<Index>(source_labels.size());
    Matrix y = Matrix::Zero(n + target_count, classes);
    for (Index i = 0; i < n; ++i) {
        const int c = source_labels[static_cast<std::size_t>(i)];
        if (c < 1 || c > classes) throw InvalidArgument("label " + std::to_string(c) + " out of range");
        y(i, c - 1) = 1.0;
    }
    return y;
}

struct Hyperparameters {
    double lambda = 10.0;  // distribution alignment weight
    double eta = 0.1;      // RKHS norm weight
    double rho = 1.0;      // Laplacian weight
    int p = kDefaultNeighbors;
    Index d = 20;          // manifold subspace dimension
    int t_max = 10;
    std::optional<double> fixed_mu;  // unset: estimate mu every iteration
    std::uint64_t seed = kDefaultSeed;

    void validate() const {
        if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
        if (!(lambda >= 0.0) || !(rho >= 0.0)) throw InvalidArgument("lambda and rho must be nonnegative");
        if (p < 1) throw InvalidArgument("p must be at least 1");
        if (d < 1) throw InvalidArgument("d must be at least 1");
        if (t_max < 1) throw InvalidArgument("t_max must be at least 1");
        if (fixed_mu && !(*fixed_mu >= 0.0 && *fixed_mu <= 1.0))
            throw InvalidArgument("fixed mu must lie in [0, 1]");
    }
};

/// Relative residual ||S beta - A Y^T||_F / ||A Y^T||_F of the stationarity system
/// S = (A + lambda M + rho L) K + eta I.
inline double stationarity_residual(const Matrix& beta, const Matrix& k, const Matrix& a,
                                    const Matrix& y_rows, const Matrix& m, const Matrix& l,
                                    double lambda, double eta, double rho) {
    const Matrix rhs = a * y_rows;
    const Matrix lhs = (a + lambda * m + rho * l) * (k * beta) + eta * beta;
    return (lhs - rhs).norm() / std::max(rhs.norm(), 1e-300);
}

/// beta* = ((A + lambda M + rho L) K + eta I)^-1 A Y^T, solved as a linear system.
/// `y_rows` holds Y^T: one row per sample, one column per class.
inline Matrix solve_beta(const Matrix& k, const Matrix& a, const Matrix& y_rows, const Matrix& m,
                         const Matrix& l, double lambda, double eta, double rho) {
    const Index size = k.rows();
    if (k.cols() != size || a.rows() != size || a.cols() != size || y_rows.rows() != size ||
        m.rows() != size || m.cols() != size || l.rows() != size || l.cols() != size)
        throw DimensionError("solver inputs disagree in shape");
    if (!(eta > 0.0)) throw InvalidArgument("eta must be positive for the system to be invertible");

    Matrix system = (a + lambda * m + rho * l) * k;
    system.diagonal().array() += eta;
    const Matrix beta = solve_refined(system, a * y_rows);
    const double resid = stationarity_residual(beta, k, a, y_rows, m, l, lambda, eta, rho);
    if (!(resid < 1e-8))
        throw SingularSystemError("solver residual " + std::to_string(resid) + " above 1e-8");
    return beta;
}

inline Matrix solve_beta(const Matrix& k, const Matrix& a, const Matrix& y_rows, const Matrix& m,
                         const Matrix& l, const Hyperparameters& hyper) {
    return solve_beta(k, a, y_rows, m, l, hyper.lambda, hyper.eta, hyper.rho);
}

/// 1-nearest-neighbour labels under Euclidean distance; ties go to the lower source row.
inline Labels base_classifier_labels(const Matrix& z_src, const Labels& source_labels,
                                     const Matrix& z_tgt) {
    if (z_src.cols() != z_tgt.cols()) throw DimensionError("1NN inputs differ in dimension");
    if (static_cast<Index>(source_labels.size()) != z_src.rows() || z_src.rows() == 0)
        throw InvalidArgument("1NN needs labeled source rows");
    const Vector src_norms = z_src.rowwise().squaredNorm();
    const Matrix cross = z_tgt * z_src.transpose();
    Labels out(static_cast<std::size_t>(z_tgt.rows()));
    for (Index t = 0; t < z_tgt.rows(); ++t) {
        Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index s = 0; s < z_src.rows(); ++s) {
            const double d = src_norms(s) - 2.0 * cross(t, s);
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        out[static_cast<std::size_t>(t)] = source_labels[static_cast<std::size_t>(best)];
    }
    return out;
}

inline Labels base_classifier_labels(const FeatureMatrix& z_src, const FeatureMatrix& z_tgt) {
    if (!z_src.labels) throw InvalidArgument("source features must be labeled");
    return base_classifier_labels(z_src.data, *z_src.labels, z_tgt.data);
}

/// Trained classifier f(z) = sum_i beta_i K(z_i, z) plus the fitting trace.
struct MedaModel {
    Matrix beta;            // (n + m) x C
    Matrix train_features;  // (n + m) x D', manifold features, source rows first
    Index source_count = 0;
    KernelSpec kernel;
    Hyperparameters hyper;
    int classes = 0;

    /// sqrt(G) when the model was fitted through the manifold transform; lets raw
    /// features be mapped before prediction.
    std::optional<Matrix> feature_map;

    Labels initial_labels;                       // base-classifier target labels
    std::vector<double> mu_history;
    std::vector<double> label_history;           // fraction of target labels unchanged
    std::vector<Labels> pseudo_label_history;    // target labels after each iteration
    std::vector<std::optional<ADistanceReport>> a_distance_history;
    bool converged = false;

    Index target_count() const { return train_features.rows() - source_count; }
    std::size_t iterations() const { return mu_history.size(); }
};

struct Prediction {
    Labels labels;
    Matrix scores;  // rows x C
};

/// Scores are K(query, train) beta; labels take the row-wise argmax.
inline Prediction predict(const MedaModel& model, const Matrix& z_query) {
    if (z_query.cols() != model.train_features.cols())
        throw DimensionError("query has " + std::to_string(z_query.cols()) +
                             " features, model expects " + std::to_string(model.train_features.cols()));
    Prediction out;
    out.scores = cross_kernel(z_query, model.train_features, model.kernel) * model.beta;
    out.labels = argmax_labels(out.scores);
    return out;
}

inline Prediction predict(const MedaModel& model, const FeatureMatrix& z_query) {
    return predict(model, z_query.data);
}

/// Fraction of positions where the two label vectors agree.
inline double accuracy(const Labels& predicted, const Labels& truth) {
    if (predicted.size() != truth.size()) throw DimensionError("label vectors differ in length");
    if (predicted.empty()) throw EmptyInputError("accuracy of an empty label set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

/// Pseudo-label refinement loop: 1NN seeds the target labels, then each iteration
/// estimates mu, rebuilds the MMD matrix from the current labels, solves for beta and
/// relabels the target rows. Stops when the labels repeat or after t_max iterations.
inline MedaModel fit(const FeatureMatrix& z_src, const FeatureMatrix& z_tgt,
                     const Hyperparameters& hyper, const KernelSpec& kernel = {}) {
    hyper.validate();
    if (!z_src.labels) throw InvalidArgument("source features must be labeled");
    z_src.check();
    if (z_src.dim() != z_tgt.dim()) throw DimensionError("source and target feature dimensions differ");
    const Index n = z_src.rows();
    const Index m = z_tgt.rows();
    if (n < 1 || m < 1) throw EmptyInputError("both domains need at least one sample");
    const Labels& ys = *z_src.labels;

    MedaModel model;
    model.hyper = hyper;
    model.source_count = n;
    model.classes = class_count(ys);
    model.train_features = stack_rows(z_src.data, z_tgt.data);
    model.kernel = resolve_kernel(kernel, model.train_features);

    const Matrix k = kernel_matrix(model.train_features, model.kernel);
    const Matrix a = build_indicator(n, m);
    const Matrix y_rows = one_hot_rows(ys, m, model.classes);
    const Matrix m0 = build_m0(n, m);
    const Matrix l = hyper.rho > 0.0 ? build_graph(model.train_features, hyper.p).l
                                     : Matrix::Zero(n + m, n + m);

    std::vector<int> present;
    for (int c = 1; c <= model.classes; ++c)
        if (std::find(ys.begin(), ys.end(), c) != ys.end()) present.push_back(c);

    Labels pseudo = base_classifier_labels(z_src.data, ys, z_tgt.data);
    model.initial_labels = pseudo;
    for (int t = 0; t < hyper.t_max; ++t) {
        double mu;
        if (hyper.fixed_mu) {
            mu = *hyper.fixed_mu;
            model.a_distance_history.emplace_back(std::nullopt);
        } else {
            MuEstimate est = estimate_mu(z_src.data, ys, z_tgt.data, pseudo, hyper.seed);
            mu = est.mu;
            model.a_distance_history.emplace_back(std::move(est.report));
        }

        std::vector<Matrix> mc;
        mc.reserve(present.size());
        for (int c : present) mc.push_back(build_mc(ys, pseudo, c).matrix);
        const Matrix mmd = combine(m0, mc, mu);

        model.beta = solve_beta(k, a, y_rows, mmd, l, hyper);
        const Labels next = argmax_labels(k.bottomRows(m) * model.beta);

        std::size_t same = 0;
        for (std::size_t i = 0; i < next.size(); ++i) same += next[i] == pseudo[i];
        const double agreement = static_cast<double>(same) / static_cast<double>(next.size());

        model.mu_history.push_back(mu);
        model.label_history.push_back(agreement);
        model.pseudo_label_history.push_back(next);
        pseudo = next;
        if (same == next.size()) {
            model.converged = true;
            break;
        }
    }
    return model;
}

}  // namespace meda
