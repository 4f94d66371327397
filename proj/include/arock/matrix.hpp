/*
 * Copyright 2026 the arock authors
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
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "arock/errors.hpp"
#include "arock/rng.hpp"

namespace arock {

// ============================================================================
// Dense square matrices (row-major) and the few spectral utilities the
// operator zoo needs.  Problem sizes are desk-scale (N in the hundreds), so a
// hand-rolled dense representation beats pulling in a linear-algebra
// dependency.
// ============================================================================

struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> a;  // row-major, n*n entries

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n, double fill = 0.0) : n(n), a(n * n, fill) {}

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
    const double* row(std::size_t i) const { return a.data() + i * n; }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    // Symmetric tridiagonal toeplitz(off, diag, off).
    static DenseMatrix tridiagonal(std::size_t n, double diag, double off) {
        DenseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            m.at(i, i) = diag;
            if (i + 1 < n) {
                m.at(i, i + 1) = off;
                m.at(i + 1, i) = off;
            }
        }
        return m;
    }

    bool symmetric(double tol = 0.0) const {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::abs(at(i, j) - at(j, i)) > tol) return false;
        return true;
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            const double* r = row(i);
            for (std::size_t j = 0; j < n; ++j) acc += r[j] * x[j];
            y[i] = acc;
        }
        return y;
    }
};

inline double vec_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

// Dominant eigenvalue magnitude by power iteration.  For the symmetric PSD
// matrices in the zoo this converges to lambda_max; for the (diagonally
// similar to symmetric) Jacobi iteration matrices it converges to the
// spectral radius.
inline double power_iteration_lambda_max(const DenseMatrix& A, double tol = 1e-10,
                                         std::size_t max_iters = 100000) {
    if (A.n == 0) throw InvalidOperatorData("power iteration: empty matrix");
    Rng rng(0x9a3f5c17u);
    std::vector<double> v(A.n);
    for (auto& x : v) x = rng.next_range(-1.0, 1.0);
    double nv = vec_norm(v);
    if (nv == 0.0) v[0] = nv = 1.0;
    for (auto& x : v) x /= nv;

    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        std::vector<double> w = A.multiply(v);
        const double nw = vec_norm(w);
        if (nw == 0.0) return 0.0;  // v in the kernel; A may be zero
        for (std::size_t i = 0; i < A.n; ++i) v[i] = w[i] / nw;
        if (it > 16 && std::abs(nw - lambda) <= tol * (1.0 + nw)) return nw;
        lambda = nw;
    }
    // Power iteration stalls only for near-ties; the growth factor is still a
    // valid estimate of the spectral radius at this point.
    return lambda;
}

// ----------------------------------------------------------------------------
// Text formats
//
// Matrix file: first line "N N", then N rows of N scalars.
// Vector file: N whitespace-separated scalars.
// ----------------------------------------------------------------------------

inline DenseMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file: " + path);
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols))
        throw IoError("matrix file " + path + ": missing 'N N' header");
    if (rows != cols || rows == 0)
        throw IoError("matrix file " + path + ": matrix must be square and nonempty");
    DenseMatrix m(rows);
    for (std::size_t i = 0; i < rows * cols; ++i) {
        if (!(in >> m.a[i]))
            throw IoError("matrix file " + path + ": expected " +
                          std::to_string(rows * cols) + " entries");
        if (!std::isfinite(m.a[i]))
            throw IoError("matrix file " + path + ": non-finite entry");
    }
    return m;
}

inline std::vector<double> load_vector(const std::string& path, std::size_t expected) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vector file: " + path);
    std::vector<double> v;
    double x;
    while (in >> x) {
        if (!std::isfinite(x)) throw IoError("vector file " + path + ": non-finite entry");
        v.push_back(x);
    }
    if (expected != 0 && v.size() != expected)
        throw IoError("vector file " + path + ": expected " +
                      std::to_string(expected) + " entries, got " +
                      std::to_string(v.size()));
    return v;
}

}  // namespace arock
