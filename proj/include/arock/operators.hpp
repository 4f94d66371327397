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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "arock/block.hpp"
#include "arock/errors.hpp"
#include "arock/matrix.hpp"
#include "arock/rng.hpp"

namespace arock {

// ============================================================================
// Nonexpansive operator zoo
//
// Every operator exposes T (nonexpansive) and S = I - T, with block-wise
// evaluation of S so the engines can update one block without forming Tx.
//
// Kinds:
//   GradQuadratic        T x = x - (2/L)(Ax - b)            (gradient descent)
//   ForwardBackwardL1    T x = soft(x - (2/L)(Ax - b), 2λ/L)
//   ProjectedGradientBox T x = clamp(x - (2/L)(Ax - b), lo, hi)
//   LinearPSD            S x = (2/M)(Ax - b); Fix(T) = {Ax = b}
//   LinearJacobi         T x = -D^{-1}R x + D^{-1} b, D = diag(A), R = A - D
// ============================================================================

enum class OperatorKind {
    GradQuadratic,
    ForwardBackwardL1,
    ProjectedGradientBox,
    LinearPSD,
    LinearJacobi,
};

inline std::string to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::GradQuadratic: return "GradQuadratic";
        case OperatorKind::ForwardBackwardL1: return "ForwardBackwardL1";
        case OperatorKind::ProjectedGradientBox: return "ProjectedGradientBox";
        case OperatorKind::LinearPSD: return "LinearPSD";
        case OperatorKind::LinearJacobi: return "LinearJacobi";
    }
    return "?";
}

// Componentwise soft threshold: sign(v_i) * max(|v_i| - t, 0).
inline std::vector<double> soft_threshold(const std::vector<double>& v, double t) {
    if (t < 0.0) throw NegativeThreshold("soft_threshold: t < 0");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]) - t;
        out[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

// Componentwise clamp into [lo_i, hi_i].
inline std::vector<double> proj_box(const std::vector<double>& v,
                                    const std::vector<double>& lo,
                                    const std::vector<double>& hi) {
    if (lo.size() != v.size() || hi.size() != v.size())
        throw InvalidBox("proj_box: bound dimensions differ from v");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (lo[i] > hi[i]) throw InvalidBox("proj_box: lo > hi at component " +
                                            std::to_string(i));
        out[i] = std::min(std::max(v[i], lo[i]), hi[i]);
    }
    return out;
}

class OperatorSpec {
public:
    // --- factories -----------------------------------------------------------
    // `validate` exists so tests can build deliberately invalid instances
    // (e.g. an under-estimated L) and watch check_nonexpansive catch them.

    static OperatorSpec grad_quadratic(BlockLayout layout, DenseMatrix A,
                                       std::vector<double> b, double L,
                                       bool validate = true) {
        OperatorSpec op(OperatorKind::GradQuadratic, std::move(layout),
                        std::move(A), std::move(b));
        op.L_ = L;
        if (validate) op.validate_quadratic("GradQuadratic", L);
        return op;
    }

    static OperatorSpec forward_backward_l1(BlockLayout layout, DenseMatrix A,
                                            std::vector<double> b, double L,
                                            double lambda, bool validate = true) {
        OperatorSpec op(OperatorKind::ForwardBackwardL1, std::move(layout),
                        std::move(A), std::move(b));
        op.L_ = L;
        op.lambda_ = lambda;
        if (lambda < 0.0) throw InvalidOperatorData("ForwardBackwardL1: lambda < 0");
        if (validate) op.validate_quadratic("ForwardBackwardL1", L);
        return op;
    }

    static OperatorSpec projected_gradient_box(BlockLayout layout, DenseMatrix A,
                                               std::vector<double> b, double L,
                                               std::vector<double> lo,
                                               std::vector<double> hi,
                                               bool validate = true) {
        OperatorSpec op(OperatorKind::ProjectedGradientBox, std::move(layout),
                        std::move(A), std::move(b));
        op.L_ = L;
        op.lo_ = std::move(lo);
        op.hi_ = std::move(hi);
        if (op.lo_.size() != op.dim() || op.hi_.size() != op.dim())
            throw InvalidBox("ProjectedGradientBox: bounds dimension mismatch");
        for (std::size_t i = 0; i < op.dim(); ++i)
            if (op.lo_[i] > op.hi_[i])
                throw InvalidBox("ProjectedGradientBox: lo > hi at " + std::to_string(i));
        if (validate) op.validate_quadratic("ProjectedGradientBox", L);
        return op;
    }

    static OperatorSpec linear_psd(BlockLayout layout, DenseMatrix A,
                                   std::vector<double> b, double M,
                                   bool validate = true) {
        OperatorSpec op(OperatorKind::LinearPSD, std::move(layout), std::move(A),
                        std::move(b));
        op.L_ = M;
        if (validate) op.validate_quadratic("LinearPSD", M);
        return op;
    }

    static OperatorSpec linear_jacobi(BlockLayout layout, DenseMatrix A,
                                      std::vector<double> b, bool validate = true) {
        OperatorSpec op(OperatorKind::LinearJacobi, std::move(layout), std::move(A),
                        std::move(b));
        for (std::size_t i = 0; i < op.A_.n; ++i)
            if (op.A_.at(i, i) == 0.0)
                throw InvalidOperatorData("LinearJacobi: zero diagonal entry");
        if (validate) {
            // Spectral radius of the Jacobi iteration matrix -D^{-1}R.
            DenseMatrix J(op.A_.n);
            for (std::size_t i = 0; i < op.A_.n; ++i)
                for (std::size_t j = 0; j < op.A_.n; ++j)
                    J.at(i, j) = (i == j) ? 0.0 : -op.A_.at(i, j) / op.A_.at(i, i);
            const double rho = power_iteration_lambda_max(J, 1e-8);
            if (rho > 1.0 + 1e-8)
                throw InvalidOperatorData(
                    "LinearJacobi: spectral radius of -D^{-1}R is " +
                    std::to_string(rho) + " > 1");
        }
        return op;
    }

    // --- basic accessors -------------------------------------------------------
    OperatorKind kind() const { return kind_; }
    const BlockLayout& layout() const { return layout_; }
    std::size_t dim() const { return layout_.total(); }
    std::size_t blocks() const { return layout_.blocks(); }
    const DenseMatrix& A() const { return A_; }
    const std::vector<double>& b() const { return b_; }
    double L() const { return L_; }
    double lambda() const { return lambda_; }

    // --- evaluation --------------------------------------------------------------

    BlockVector apply_T(const BlockVector& x) const {
        check_layout(x);
        BlockVector out(layout_);
        std::vector<double> s = full_S(x.data);
        for (std::size_t i = 0; i < dim(); ++i) out.data[i] = x.data[i] - s[i];
        if (!out.finite()) throw NonFinite("apply_T produced non-finite values");
        return out;
    }

    // S = I - T, full vector.
    BlockVector apply_S(const BlockVector& x) const {
        check_layout(x);
        BlockVector out(layout_);
        out.data = full_S(x.data);
        if (!out.finite()) throw NonFinite("apply_S produced non-finite values");
        return out;
    }

    // Block i of S x, without forming the full image.
    std::vector<double> apply_S_block(const BlockVector& x, std::size_t i) const {
        check_layout(x);
        if (i >= blocks())
            throw BlockOutOfRange("apply_S_block: block " + std::to_string(i) +
                                  " out of range");
        const std::size_t off = layout_.offsets[i];
        const std::size_t len = layout_.block_sizes[i];
        std::vector<double> s(len);
        for (std::size_t r = 0; r < len; ++r)
            s[r] = scalar_S(x.data, off + r);
        return s;
    }

    double fpr_norm(const BlockVector& x) const { return norm(apply_S(x)); }

    // --- diagnostics ---------------------------------------------------------

    struct NonexpansiveReport {
        double max_ratio = 0.0;
        std::size_t trials = 0;
    };

    // Samples random pairs and asserts ||Tx - Ty|| <= (1 + 1e-10)||x - y||.
    NonexpansiveReport check_nonexpansive(std::size_t trials,
                                          std::uint64_t seed) const {
        if (trials < 1)
            throw InvalidParameters("check_nonexpansive: trials must be >= 1");
        Rng rng(seed);
        NonexpansiveReport rep;
        rep.trials = trials;
        BlockVector x(layout_), y(layout_);
        for (std::size_t t = 0; t < trials; ++t) {
            for (auto& v : x.data) v = rng.next_gaussian();
            for (auto& v : y.data) v = rng.next_gaussian();
            const double dxy = distance(x, y);
            if (dxy == 0.0) continue;
            const double dT = distance(apply_T(x), apply_T(y));
            const double ratio = dT / dxy;
            rep.max_ratio = std::max(rep.max_ratio, ratio);
            if (ratio > 1.0 + 1e-10)
                throw NonexpansivenessViolated(
                    to_string(kind_) + ": expansion ratio " + std::to_string(ratio) +
                    " > 1 on trial " + std::to_string(t),
                    ratio);
        }
        return rep;
    }

    // Synchronous KM iteration x <- x - (1/2) Sx until ||Sx|| <= tol.
    BlockVector solve_reference(double tol, std::size_t max_iters = 5000000) const {
        if (tol <= 0.0) throw InvalidParameters("solve_reference: tol must be > 0");
        BlockVector x(layout_);
        for (std::size_t it = 0; it < max_iters; ++it) {
            BlockVector s = apply_S(x);
            if (norm(s) <= tol) return x;
            for (std::size_t i = 0; i < dim(); ++i) x.data[i] -= 0.5 * s.data[i];
        }
        BlockVector s = apply_S(x);
        if (norm(s) <= tol) return x;
        throw MaxIterationsExceeded("solve_reference: ||Sx|| = " +
                                    std::to_string(norm(s)) + " after " +
                                    std::to_string(max_iters) + " iterations");
    }

private:
    OperatorSpec(OperatorKind kind, BlockLayout layout, DenseMatrix A,
                 std::vector<double> b)
        : kind_(kind), layout_(std::move(layout)), A_(std::move(A)), b_(std::move(b)) {
        if (A_.n != layout_.total())
            throw InvalidOperatorData("operator: matrix dimension " +
                                      std::to_string(A_.n) +
                                      " does not match layout dimension " +
                                      std::to_string(layout_.total()));
        if (b_.size() != layout_.total())
            throw InvalidOperatorData("operator: b dimension mismatch");
    }

    void validate_quadratic(const std::string& name, double bound) const {
        if (bound <= 0.0) throw InvalidOperatorData(name + ": constant must be > 0");
        double max_abs = 0.0;
        for (double v : A_.a) max_abs = std::max(max_abs, std::abs(v));
        if (!A_.symmetric(1e-12 * (1.0 + max_abs)))
            throw InvalidOperatorData(name + ": A must be symmetric");
        const double lmax = power_iteration_lambda_max(A_, 1e-8);
        if (bound < lmax * (1.0 - 1e-8))
            throw InvalidOperatorData(name + ": constant " + std::to_string(bound) +
                                      " is below lambda_max(A) = " +
                                      std::to_string(lmax));
    }

    void check_layout(const BlockVector& x) const {
        if (!(x.layout == layout_))
            throw LayoutMismatch(to_string(kind_) + ": input layout mismatch");
    }

    // (S x)_r for one global coordinate r.
    double scalar_S(const std::vector<double>& x, std::size_t r) const {
        const double* row = A_.row(r);
        double dot = 0.0;
        for (std::size_t j = 0; j < A_.n; ++j) dot += row[j] * x[j];
        switch (kind_) {
            case OperatorKind::GradQuadratic:
            case OperatorKind::LinearPSD:
                return (2.0 / L_) * (dot - b_[r]);
            case OperatorKind::ForwardBackwardL1: {
                const double z = x[r] - (2.0 / L_) * (dot - b_[r]);
                const double t = (2.0 / L_) * lambda_;
                const double mag = std::abs(z) - t;
                const double prox = mag > 0.0 ? (z > 0.0 ? mag : -mag) : 0.0;
                return x[r] - prox;
            }
            case OperatorKind::ProjectedGradientBox: {
                const double z = x[r] - (2.0 / L_) * (dot - b_[r]);
                return x[r] - std::min(std::max(z, lo_[r]), hi_[r]);
            }
            case OperatorKind::LinearJacobi: {
                // R = A - D, so R_r . x = dot - a_rr x_r.
                const double d = A_.at(r, r);
                return x[r] + ((dot - d * x[r]) - b_[r]) / d;
            }
        }
        throw InvalidOperatorData("unknown operator kind");
    }

    std::vector<double> full_S(const std::vector<double>& x) const {
        std::vector<double> s(dim());
        for (std::size_t r = 0; r < dim(); ++r) s[r] = scalar_S(x, r);
        return s;
    }

    OperatorKind kind_;
    BlockLayout layout_;
    DenseMatrix A_;
    std::vector<double> b_;
    double L_ = 1.0;
    double lambda_ = 0.0;
    std::vector<double> lo_, hi_;
};

struct FixedPointProblem {
    OperatorSpec op;
    std::optional<BlockVector> known_solution;

    explicit FixedPointProblem(OperatorSpec o,
                               std::optional<BlockVector> xstar = std::nullopt)
        : op(std::move(o)), known_solution(std::move(xstar)) {
        if (known_solution) {
            const double res = op.fpr_norm(*known_solution);
            if (res > 1e-9 * (1.0 + norm(*known_solution)))
                throw InvalidOperatorData(
                    "FixedPointProblem: known_solution has residual " +
                    std::to_string(res));
        }
    }
};

}  // namespace arock
