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
#include <string>
#include <vector>

#include "arock/block.hpp"
#include "arock/errors.hpp"
#include "arock/operators.hpp"
#include "arock/stepsize.hpp"

namespace arock {

// ============================================================================
// Lyapunov instrumentation
//
//   xi^k = ||x^k - x*||^2 + (1/m) sum_{i=1}^{K} c_i ||x^{k+1-i} - x^{k-i}||^2
//
// with x^n = x^0 for n < 0 and coefficients c_i from the stepsize module.
//
// The descent checker conditions on the realized delay vector d and verifies
//
//   E[xi^{k+1} | x^k, d]  <=  BP(k, d) - (eta/m) ||S xhat||^2 max(0, 1 - eta/h)
//                              + 1e-12 (1 + xi^k)
//
// where BP(k, d) is the branch-point majorant
//
//   BP = ||x^k - x*||^2 + (1/m) [ sum_{i<=j(k)} eps_i ||d_i||^2
//                               + sum_{i<=K} c_{i+1} ||d_i||^2 ],
//
// d_i = x^{k+1-i} - x^{k-i} and c_{K+1} = 0, and h is the policy bound for
// the realized current delay (constant in stochastic mode, h_j in
// deterministic mode).  For eta <= h the inequality is exactly the descent
// lemma conditioned on the realized delays and must hold on every step; for
// eta > h the descent credit is clamped at zero — an oversized step earns no
// relaxation budget — which is what makes the checker falsifiable.
// ============================================================================

struct LyapunovState {
    std::vector<double> coefficients;  // c_1..c_K
    BlockVector xstar;
    std::size_t m = 0;

    LyapunovState(std::vector<double> c, BlockVector xs, std::size_t m)
        : coefficients(std::move(c)), xstar(std::move(xs)), m(m) {
        if (m == 0) throw InvalidParameters("LyapunovState: m must be >= 1");
        for (std::size_t i = 0; i + 1 < coefficients.size(); ++i)
            if (coefficients[i] + 1e-15 < coefficients[i + 1])
                throw InvalidParameters("LyapunovState: coefficients must be nonincreasing");
    }

    long long K() const { return static_cast<long long>(coefficients.size()); }
};

namespace detail {

// ||x^{k+1-i} - x^{k-i}||^2 with the n < 0 -> x0 convention.
inline double squared_diff(const IterateHistory& hist, long long k, long long i) {
    const long long hi = k + 1 - i;
    if (hi <= 0) return 0.0;  // both operands are x^0
    return squared_distance(hist.at(hi), hist.at(hi - 1));
}

}  // namespace detail

inline double lyapunov_value(const LyapunovState& state, const IterateHistory& hist,
                             long long k) {
    const BlockVector& xk = hist.at(k);
    double xi = squared_distance(xk, state.xstar);
    const long long depth = std::min<long long>(state.K(), k);
    for (long long i = 1; i <= depth; ++i)
        xi += state.coefficients[static_cast<std::size_t>(i - 1)] *
              detail::squared_diff(hist, k, i) / static_cast<double>(state.m);
    return xi;
}

inline double fpr_norm(const OperatorSpec& op, const BlockVector& x) {
    return op.fpr_norm(x);
}

// Exact E[xi^{k+1} | x^k, d]: averages xi^{k+1} over all m equally likely
// block choices i(k), each applying x^{k+1} = x^k - eta S_{i}(xhat^k).
inline double exact_expected_next(const LyapunovState& state, const OperatorSpec& op,
                                  const IterateHistory& hist, long long k,
                                  const DelayVector& d, double eta) {
    const std::size_t m = state.m;
    if (m > 64)
        throw EnumerationTooLarge("exact_expected_next: m = " + std::to_string(m) +
                                  " > 64");
    const BlockVector& xk = hist.at(k);
    const BlockVector xhat = hist.delayed_read(k, d);
    const BlockVector S = op.apply_S(xhat);

    const double dist2 = squared_distance(xk, state.xstar);
    // xi^{k+1} terms with i >= 2 do not depend on the candidate update: the
    // difference at depth i of step k+1 is the difference at depth i-1 of
    // step k.
    double shifted_tail = 0.0;
    const long long K = state.K();
    const long long depth = std::min<long long>(K, k + 1);
    for (long long i = 2; i <= depth; ++i)
        shifted_tail += state.coefficients[static_cast<std::size_t>(i - 1)] *
                        detail::squared_diff(hist, k, i - 1) / static_cast<double>(m);

    const double c1 = state.coefficients.empty() ? 0.0 : state.coefficients[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double* xb = xk.block(i);
        const double* sb = S.block(i);
        const double* star = state.xstar.block(i);
        const std::size_t len = xk.block_size(i);
        double old_b = 0.0, new_b = 0.0, step2 = 0.0;
        for (std::size_t r = 0; r < len; ++r) {
            const double o = xb[r] - star[r];
            const double n = o - eta * sb[r];
            old_b += o * o;
            new_b += n * n;
            step2 += (eta * sb[r]) * (eta * sb[r]);
        }
        const double cand_dist2 = dist2 - old_b + new_b;
        acc += cand_dist2 + c1 * step2 / static_cast<double>(m) + shifted_tail;
    }
    return acc / static_cast<double>(m);
}

struct DescentReport {
    long long k = 0;
    double eta = 0.0;
    double h_eff = 1.0;        // policy bound for the realized current delay
    double xi_k = 0.0;
    double expected_next = 0.0;
    double rhs = 0.0;          // clamped bound incl. tolerance
    double slack = 0.0;        // rhs - expected_next; violation iff < 0
    double unclamped_slack = 0.0;
    bool ok = true;
};

class DescentChecker {
public:
    // The checker derives its own h from (eps, coefficients) so that the bound
    // and the Lyapunov metric always use the matching coefficient formula.
    DescentChecker(LyapunovState state, const EpsilonSequence& eps,
                   CoefficientMode mode)
        : state_(std::move(state)), mode_(mode) {
        const long long K = state_.K();
        eps_.resize(static_cast<std::size_t>(K));
        inv_eps_prefix_.resize(static_cast<std::size_t>(K) + 1, 0.0);
        double acc = 0.0;
        for (long long l = 1; l <= K; ++l) {
            const double e = eps(l);
            eps_[static_cast<std::size_t>(l - 1)] = e;
            acc += std::isinf(e) ? 0.0 : 1.0 / e;
            inv_eps_prefix_[static_cast<std::size_t>(l)] = acc;
        }
        const double c1 = state_.coefficients.empty() ? 0.0 : state_.coefficients[0];
        base_ = 1.0 + c1 / static_cast<double>(state_.m);
    }

    // h for the realized current delay j: stochastic coefficients use the
    // full series (h constant), deterministic ones the per-delay prefix.
    double h_eff(long long j) const {
        const long long K = state_.K();
        if (mode_ == CoefficientMode::Stochastic)
            return 1.0 / (base_ + inv_eps_prefix_[static_cast<std::size_t>(K)]);
        const long long idx = std::min<long long>(std::max<long long>(j, 0), K);
        return 1.0 / (base_ + inv_eps_prefix_[static_cast<std::size_t>(idx)]);
    }

    DescentReport check(const OperatorSpec& op, const IterateHistory& hist,
                        long long k, const DelayVector& d, double eta) const {
        const long long j = d.current();
        const long long K = state_.K();
        if (j > K)
            throw InvalidParameters("DescentChecker: realized delay " +
                                    std::to_string(j) + " exceeds truncation K=" +
                                    std::to_string(K));
        DescentReport rep;
        rep.k = k;
        rep.eta = eta;
        rep.h_eff = h_eff(j);
        rep.xi_k = lyapunov_value(state_, hist, k);
        rep.expected_next = exact_expected_next(state_, op, hist, k, d, eta);

        // Branch-point majorant with the realized delays.
        const BlockVector& xk = hist.at(k);
        double bp = squared_distance(xk, state_.xstar);
        const double md = static_cast<double>(state_.m);
        const long long depth = std::min<long long>(K, k);
        for (long long i = 1; i <= depth; ++i) {
            double w = (i < K) ? state_.coefficients[static_cast<std::size_t>(i)] : 0.0;
            if (i <= j) {
                const double e = eps_[static_cast<std::size_t>(i - 1)];
                if (std::isinf(e))
                    throw InvalidParameters(
                        "DescentChecker: eps_" + std::to_string(i) +
                        " is undefined inside the realized delay range");
                w += e;
            }
            if (w != 0.0) bp += w * detail::squared_diff(hist, k, i) / md;
        }

        const BlockVector xhat = hist.delayed_read(k, d);
        const double s2 = squared_distance(xhat, op.apply_T(xhat));  // ||S xhat||^2
        const double credit = (eta / md) * s2;
        const double tol = 1e-12 * (1.0 + rep.xi_k);

        rep.rhs = bp - credit * std::max(0.0, 1.0 - eta / rep.h_eff) + tol;
        rep.slack = rep.rhs - rep.expected_next;
        rep.unclamped_slack =
            bp - credit * (1.0 - eta / rep.h_eff) + tol - rep.expected_next;
        rep.ok = rep.slack >= 0.0;
        return rep;
    }

    DescentReport check_or_throw(const OperatorSpec& op, const IterateHistory& hist,
                                 long long k, const DelayVector& d, double eta) const {
        DescentReport rep = check(op, hist, k, d, eta);
        if (!rep.ok)
            throw DescentViolated("descent inequality violated at k=" +
                                      std::to_string(k) + " (slack " +
                                      std::to_string(rep.slack) + ", eta " +
                                      std::to_string(eta) + ")",
                                  k, eta, rep.slack);
        return rep;
    }

    const LyapunovState& state() const { return state_; }
    CoefficientMode mode() const { return mode_; }

private:
    LyapunovState state_;
    CoefficientMode mode_;
    std::vector<double> eps_;
    std::vector<double> inv_eps_prefix_;
    double base_ = 1.0;
};

}  // namespace arock
