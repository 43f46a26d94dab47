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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "meda/error.hpp"
#include "meda/types.hpp"

namespace meda {

struct SqrtmResult {
    Matrix root;
    int iterations = 0;
};

/// Principal square root by the product form of the Denman-Beavers iteration with
/// determinant scaling:
///
///   M_{k+1} = (I + (s^2 M_k + s^-2 M_k^-1) / 2) / 2
///   Y_{k+1} = s Y_k (I + s^-2 M_k^-1) / 2,      M_0 = Y_0 = A,  s = |det M_k|^(-1/2n)
///
/// Y_k converges to A^{1/2} as M_k converges to I. The input must be nonsingular with
/// no eigenvalues on the closed negative real axis.
inline SqrtmResult sqrtm_denman_beavers(const Matrix& a, double tol = 1e-10, int max_iter = 100) {
    if (a.rows() != a.cols()) throw DimensionError("square root of a non-square matrix");
    const Index n = a.rows();
    if (n == 0) return {Matrix(0, 0), 0};
    if (!a.allFinite()) throw DegenerateError("square root input has non-finite entries");

    const Matrix eye = Matrix::Identity(n, n);
    Matrix m = a;
    Matrix y = a;
    bool scaling = true;
    for (int k = 1; k <= max_iter; ++k) {
        Eigen::PartialPivLU<Matrix> lu(m);
        double log_abs_det = 0.0;
        for (Index i = 0; i < n; ++i) log_abs_det += std::log(std::abs(lu.matrixLU()(i, i)));
        if (!std::isfinite(log_abs_det))
            throw ConvergenceError("Denman-Beavers iterate became singular at step " +
                                   std::to_string(k));
        const Matrix m_inv = lu.inverse();
        const double s = scaling ? std::exp(-log_abs_det / (2.0 * static_cast<double>(n))) : 1.0;
        const double s2 = s * s;

        Matrix y_next = 0.5 * s * y * (eye + m_inv / s2);
        m = 0.5 * (eye + 0.5 * (s2 * m + m_inv / s2));
        const double step = (y_next - y).norm() / std::max(y_next.norm(), 1e-300);
        y = std::move(y_next);

        if (!y.allFinite()) throw ConvergenceError("Denman-Beavers iterate diverged");
        const double defect = (m - eye).norm();
        if (defect < 1e-2) scaling = false;
        if (defect <= tol || step <= tol) return {y, k};
    }
    throw ConvergenceError("Denman-Beavers did not reach tolerance " + std::to_string(tol) +
                           " within " + std::to_string(max_iter) + " iterations");
}

/// Solves A X = B by partial-pivot LU followed by iterative refinement. Never forms A^-1.
inline Matrix solve_refined(const Matrix& a, const Matrix& b, double rel_tol = 1e-12,
                            int max_refine = 5) {
    if (a.rows() != a.cols() || a.rows() != b.rows())
        throw DimensionError("linear system shape mismatch");
    Eigen::PartialPivLU<Matrix> lu(a);
    if (!(lu.rcond() > 1e-16)) throw SingularSystemError("system matrix is numerically singular");
    Matrix x = lu.solve(b);
    const double b_norm = std::max(b.norm(), 1e-300);
    for (int it = 0; it < max_refine; ++it) {
        const Matrix r = b - a * x;
        if (r.norm() / b_norm <= rel_tol) break;
        x += lu.solve(r);
    }
    if (!x.allFinite()) throw SingularSystemError("linear solve produced non-finite values");
    return x;
}

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Deterministic random source. Distributions are implemented here rather than taken
/// from <random> so that a seed produces the same stream with every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do v = engine_();
        while (v >= limit);
        return v % bound;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do u1 = uniform();
        while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    Matrix normal_matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) m(i, j) = normal();
        return m;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Orthonormal basis of a random d-dimensional subspace of R^D.
inline Matrix random_orthonormal(Rng& rng, Index dim, Index d) {
    Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(dim, d));
    return qr.householderQ() * Matrix::Identity(dim, d);
}

}  // namespace meda
