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

// Independent reference computations used by the unit and acceptance suites. Nothing in
// here calls into the library routines it is used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "meda/types.hpp"

namespace meda::oracle {

/// sin of the largest principal angle between span(a) and span(b) (orthonormal columns).
inline double max_principal_sine(const Matrix& a, const Matrix& b) {
    const Matrix resid = b - a * (a.transpose() * b);
    Eigen::JacobiSVD<Matrix> svd(resid);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Top-k right singular vectors of the mean-centered rows, from a full two-sided SVD.
inline Matrix top_right_singular_vectors(const Matrix& x, Index k) {
    const Matrix centered = x.rowwise() - x.colwise().mean();
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixV().leftCols(k);
}

/// Grassmann geodesic from span(ps) to span(pt) in the tangent-vector form
///   Phi(t) = ps V cos(t T) + U sin(t T),  U tan(T) V^T = (I - ps ps^T) pt (ps^T pt)^-1.
/// Valid when no principal angle equals pi/2.
struct Geodesic {
    Matrix ps_v, u;
    Vector theta;

    Geodesic(const Matrix& ps, const Matrix& pt) {
        const Matrix m = ps.transpose() * pt;
        const Matrix tangent = (pt - ps * m) * m.inverse();
        Eigen::JacobiSVD<Matrix> svd(tangent, Eigen::ComputeThinU | Eigen::ComputeThinV);
        ps_v = ps * svd.matrixV();
        u = svd.matrixU();
        theta = svd.singularValues().array().atan();
    }

    Matrix at(double t) const {
        const Vector c = (t * theta).array().cos();
        const Vector s = (t * theta).array().sin();
        return ps_v * c.asDiagonal() + u * s.asDiagonal();
    }
};

/// Gram matrix X^T (int_0^1 Phi Phi^T dt) X by the composite trapezoid rule on `points`
/// nodes. Columns of `x` are the vectors.
inline Matrix geodesic_gram_quadrature(const Matrix& ps, const Matrix& pt, const Matrix& x,
                                       int points = 10000) {
    const Geodesic geo(ps, pt);
    const double h = 1.0 / (points - 1);
    Matrix gram = Matrix::Zero(x.cols(), x.cols());
    for (int k = 0; k < points; ++k) {
        const double w = (k == 0 || k == points - 1) ? 0.5 * h : h;
        const Matrix proj = geo.at(k * h).transpose() * x;
        gram.noalias() += w * proj.transpose() * proj;
    }
    return gram;
}

/// Square root of a symmetric PSD matrix through its eigendecomposition.
inline Matrix sqrt_psd_eig(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()));
    // Eigenvalues at rounding level belong to the null space; their roots would be ~1e-8.
    const double floor = 1e-13 * es.eigenvalues().cwiseAbs().maxCoeff();
    const Vector root =
        es.eigenvalues().unaryExpr([floor](double v) { return v > floor ? std::sqrt(v) : 0.0; });
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

inline double min_eigenvalue(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// sum_c (mean of f over rows in `a_rows` - mean over rows in `b_rows`)^2, i.e. the
/// empirical projected MMD for a multi-output f with rows as samples.
inline double squared_mean_gap(const Matrix& f, const std::vector<Index>& a_rows,
                               const std::vector<Index>& b_rows) {
    if (a_rows.empty() || b_rows.empty()) return 0.0;
    Vector mean_a = Vector::Zero(f.cols());
    Vector mean_b = Vector::Zero(f.cols());
    for (Index i : a_rows) mean_a += f.row(i).transpose();
    for (Index i : b_rows) mean_b += f.row(i).transpose();
    mean_a /= static_cast<double>(a_rows.size());
    mean_b /= static_cast<double>(b_rows.size());
    return (mean_a - mean_b).squaredNorm();
}

inline double cosine(const Matrix& z, Index i, Index j) {
    return z.row(i).dot(z.row(j)) / (z.row(i).norm() * z.row(j).norm());
}

/// p-NN cosine affinity by sorting every row's similarities (ties to the lower index),
/// then symmetrizing with the "either is a neighbor of the other" rule.
inline Matrix brute_force_affinity(const Matrix& z, int p) {
    const Index n = z.rows();
    std::vector<std::vector<bool>> is_nbr(n, std::vector<bool>(n, false));
    for (Index i = 0; i < n; ++i) {
        std::vector<std::pair<double, Index>> cand;
        for (Index j = 0; j < n; ++j)
            if (j != i) cand.emplace_back(cosine(z, i, j), j);
        std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
            return x.first != y.first ? x.first > y.first : x.second < y.second;
        });
        for (int k = 0; k < p; ++k) is_nbr[i][cand[k].second] = true;
    }
    Matrix w = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j && (is_nbr[i][j] || is_nbr[j][i])) w(i, j) = std::max(cosine(z, i, j), 0.0);
    return w;
}

/// sum_ij W_ij (f_i - f_j)^2 summed over the columns of f.
inline double laplacian_double_sum(const Matrix& w, const Matrix& f) {
    double total = 0.0;
    for (Index i = 0; i < w.rows(); ++i)
        for (Index j = 0; j < w.cols(); ++j) total += w(i, j) * (f.row(i) - f.row(j)).squaredNorm();
    return total;
}

/// Kernel ridge regression restricted to the first n rows: (K_ss + eta I)^-1 Y_s,
/// padded with zero rows for the remaining samples.
inline Matrix source_kernel_ridge(const Matrix& k, const Matrix& y_rows, Index n, double eta) {
    const Matrix kss = k.topLeftCorner(n, n) + eta * Matrix::Identity(n, n);
    Matrix beta = Matrix::Zero(k.rows(), y_rows.cols());
    beta.topRows(n) = kss.ldlt().solve(y_rows.topRows(n));
    return beta;
}

/// ||(Y - beta^T K) A||_F^2 + eta tr(beta^T K beta) + tr(beta^T K (lambda M + rho L) K beta)
/// with the label matrix given row-per-sample (i.e. Y^T).
inline double objective(const Matrix& beta, const Matrix& k, const Matrix& a_diag,
                        const Matrix& y_rows, const Matrix& m, const Matrix& l, double lambda,
                        double eta, double rho) {
    const Matrix kb = k * beta;
    double loss = 0.0;
    for (Index i = 0; i < k.rows(); ++i)
        loss += a_diag(i, i) * (y_rows.row(i) - kb.row(i)).squaredNorm();
    const double norm_term = (beta.transpose() * kb).trace();
    const double align = (kb.transpose() * (lambda * m + rho * l) * kb).trace();
    return loss + eta * norm_term + align;
}

/// Index of the nearest row of `ref` to each row of `query`; ties to the lower index.
inline std::vector<Index> nearest_rows(const Matrix& ref, const Matrix& query) {
    std::vector<Index> out(query.rows());
    for (Index q = 0; q < query.rows(); ++q) {
        double best = std::numeric_limits<double>::infinity();
        for (Index r = 0; r < ref.rows(); ++r) {
            const double d = (ref.row(r) - query.row(q)).squaredNorm();
            if (d < best) {
                best = d;
                out[q] = r;
            }
        }
    }
    return out;
}

}  // namespace meda::oracle
