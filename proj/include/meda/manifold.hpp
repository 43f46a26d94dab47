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

// Grassmann-manifold feature learning: PCA subspaces of each domain, the geodesic flow
// kernel G between them, and the feature map z = sqrt(G) x.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "meda/error.hpp"
#include "meda/linalg.hpp"
#include "meda/types.hpp"

namespace meda {

struct Subspace {
    Matrix basis;               // D x d, orthonormal columns
    Vector explained_variance;  // length d, descending

    Index ambient_dim() const { return basis.rows(); }
    Index dim() const { return basis.cols(); }
};

struct GeodesicKernel {
    Matrix g;                  // D x D, symmetric PSD
    Matrix sqrt_g;             // D x D, symmetric, sqrt_g * sqrt_g = g
    Vector principal_angles;   // length d, in [0, pi/2], ascending
    Index dim = 0;             // subspace dimension d
    int sqrt_iterations = 0;   // Denman-Beavers steps used

    Index ambient_dim() const { return g.rows(); }

    static GeodesicKernel identity(Index ambient) {
        GeodesicKernel k;
        k.g = Matrix::Identity(ambient, ambient);
        k.sqrt_g = k.g;
        k.dim = ambient;
        return k;
    }
};

inline void check_subspace_dim(Index ambient, Index d) {
    if (d < 1) throw DimensionError("subspace dimension must be at least 1");
    if (2 * d > ambient)
        throw DimensionError("subspace dimension " + std::to_string(d) +
                             " exceeds half the feature dimension " + std::to_string(ambient));
}

/// Top-d principal directions of the mean-centered rows of `x`.
inline Subspace pca_subspace(const FeatureMatrix& x, Index d) {
    const Index n = x.rows();
    const Index ambient = x.dim();
    check_subspace_dim(ambient, d);
    if (n < d) throw DimensionError("PCA needs at least d rows");

    const Matrix centered = x.data.rowwise() - x.data.colwise().mean();
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double rank_tol =
        static_cast<double>(std::max(n, ambient)) * 1e-13 * (sv.size() ? sv(0) : 0.0);
    if (sv.size() < d || !(sv(d - 1) > rank_tol))
        throw DimensionError("subspace dimension " + std::to_string(d) +
                             " exceeds the rank of the centered data");

    Subspace s;
    s.basis = svd.matrixV().leftCols(d);
    // Fix the sign of each direction so the result does not depend on the SVD backend.
    for (Index j = 0; j < d; ++j) {
        Index arg;
        s.basis.col(j).cwiseAbs().maxCoeff(&arg);
        if (s.basis(arg, j) < 0) s.basis.col(j) *= -1.0;
    }
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    s.explained_variance = sv.head(d).array().square() / denom;
    return s;
}

namespace detail {

// Integrals over t in [0, 1] of cos^2(t a), sin^2(t a) and -cos(t a) sin(t a).
struct FlowCoefficients {
    double cos2, sin2, cross;
};

inline FlowCoefficients flow_coefficients(double angle) {
    if (angle < 1e-3) {
        const double a2 = angle * angle;
        const double sin2 = a2 / 3.0 - a2 * a2 / 15.0 + 2.0 * a2 * a2 * a2 / 315.0;
        const double s = std::sin(angle);
        return {1.0 - sin2, sin2, angle < 1e-10 ? -0.5 * angle : -s * s / (2.0 * angle)};
    }
    const double half_sinc = std::sin(2.0 * angle) / (4.0 * angle);
    const double s = std::sin(angle);
    return {0.5 + half_sinc, 0.5 - half_sinc, -s * s / (2.0 * angle)};
}

}  // namespace detail

/// Geodesic flow kernel between two PCA subspaces, with its principal square root.
///
/// With P_s^T P_t = U diag(cos a) V^T, the geodesic is
///   Phi(t) = P_s U cos(t a) - Q sin(t a),   Q = -(P_t V - P_s U cos a) / sin a
/// so Phi(0) spans S_src and Phi(1) = P_t V spans S_tgt. Integrating Phi Phi^T over
/// [0, 1] gives G = E C E^T with E = [P_s U, Q] and C built from 2x2 blocks of the
/// flow coefficients. Directions at angle zero only contribute their P_s U column.
inline GeodesicKernel geodesic_flow_kernel(const Subspace& src, const Subspace& tgt,
                                           double sqrt_tol = 1e-10, int sqrt_max_iter = 100) {
    if (src.ambient_dim() != tgt.ambient_dim() || src.dim() != tgt.dim())
        throw DimensionError("source and target subspaces differ in shape");
    const Index ambient = src.ambient_dim();
    const Index d = src.dim();
    check_subspace_dim(ambient, d);

    Eigen::JacobiSVD<Matrix> svd(src.basis.transpose() * tgt.basis,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix a = src.basis * svd.matrixU();
    const Matrix b = tgt.basis * svd.matrixV();

    GeodesicKernel out;
    out.dim = d;
    out.principal_angles.resize(d);

    Matrix e(ambient, 2 * d);
    Matrix c = Matrix::Zero(2 * d, 2 * d);
    Index cols = 0;
    for (Index i = 0; i < d; ++i) {
        const double cos_a = a.col(i).dot(b.col(i));
        const Vector resid = b.col(i) - cos_a * a.col(i);
        const double sin_a = resid.norm();
        const double angle = std::atan2(sin_a, cos_a);
        if (!std::isfinite(angle))
            throw DegenerateError("principal angle " + std::to_string(i) + " is not finite");
        out.principal_angles(i) = angle;

        const auto k = detail::flow_coefficients(angle);
        e.col(cols) = a.col(i);
        c(cols, cols) = k.cos2;
        if (angle >= 1e-10) {
            e.col(cols + 1) = -resid / sin_a;
            c(cols + 1, cols + 1) = k.sin2;
            c(cols, cols + 1) = k.cross;
            c(cols + 1, cols) = k.cross;
            cols += 2;
        } else {
            cols += 1;
        }
    }
    e.conservativeResize(ambient, cols);
    c.conservativeResize(cols, cols);

    // Re-express in an orthonormal basis of span(E) so that
    // sqrt(G) = Q sqrt(R C R^T) Q^T holds even when E drifts from orthonormality.
    Eigen::HouseholderQR<Matrix> qr(e);
    const Matrix q = qr.householderQ() * Matrix::Identity(ambient, cols);
    const Matrix r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    const Matrix h = symmetrized(r * c * r.transpose());

    const SqrtmResult root = sqrtm_denman_beavers(h, sqrt_tol, sqrt_max_iter);
    out.sqrt_iterations = root.iterations;
    out.g = symmetrized(q * h * q.transpose());
    out.sqrt_g = symmetrized(q * root.root * q.transpose());
    if (!out.g.allFinite() || !out.sqrt_g.allFinite())
        throw DegenerateError("geodesic flow kernel has non-finite entries");
    return out;
}

/// Fits per-domain PCA subspaces of dimension d and returns the kernel between them.
inline GeodesicKernel learn_geodesic_kernel(const FeatureMatrix& src, const FeatureMatrix& tgt,
                                            Index d) {
    if (src.dim() != tgt.dim()) throw DimensionError("source and target feature dimensions differ");
    return geodesic_flow_kernel(pca_subspace(src, d), pca_subspace(tgt, d));
}

/// Z = X sqrt(G): row i becomes sqrt(G) x_i. Domain and labels carry over.
inline FeatureMatrix manifold_transform(const GeodesicKernel& g, const FeatureMatrix& x) {
    if (x.dim() != g.ambient_dim())
        throw DimensionError("feature dimension " + std::to_string(x.dim()) +
                             " does not match kernel dimension " +
                             std::to_string(g.ambient_dim()));
    FeatureMatrix z;
    z.data = x.data * g.sqrt_g;
    z.domain = x.domain;
    z.labels = x.labels;
    return z;
}

}  // namespace meda
