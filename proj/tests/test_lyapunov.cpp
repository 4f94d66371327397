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
#include <doctest.h>

#include <cmath>
#include <vector>

#include "arock/lyapunov.hpp"
#include "arock/rng.hpp"

using namespace arock;

namespace {

// S = 2I on m size-1 blocks (A = I, b = 0, L = 1 => T = -I).
OperatorSpec make_s2i(std::size_t m) {
    return OperatorSpec::grad_quadratic(BlockLayout::uniform(m),
                                        DenseMatrix::identity(m),
                                        std::vector<double>(m, 0.0), 1.0);
}

LyapunovState make_state(std::vector<double> c, std::vector<double> xstar) {
    const std::size_t m = xstar.size();
    return LyapunovState(std::move(c),
                         BlockVector(BlockLayout::uniform(m), std::move(xstar)), m);
}

DescentChecker make_checker(std::size_t m, double C, double r, long long K) {
    const auto tail = DelayModel::geometric_tail(1, C, r).tail_probability();
    const auto eps = EpsilonSequence::largest_step(m, tail, K);
    auto coeffs = lyapunov_coefficients(eps, &tail, CoefficientMode::Stochastic, K);
    LyapunovState state(std::move(coeffs),
                        BlockVector(BlockLayout::uniform(m)), m);
    return DescentChecker(std::move(state), eps, CoefficientMode::Stochastic);
}

}  // namespace

TEST_CASE("lyapunov_value: zero at the fixed point, dist^2 at k = 0") {
    LyapunovState state = make_state({1.0, 0.5}, {1.0, -1.0});
    const BlockLayout layout = BlockLayout::uniform(2);
    BlockVector xstar(layout, {1.0, -1.0});
    IterateHistory hist(layout, 8, xstar);
    hist.push(xstar, 0);
    CHECK(lyapunov_value(state, hist, 0) == 0.0);

    BlockVector x0(layout, {3.0, -1.0});
    IterateHistory h2(layout, 8, x0);
    h2.push(x0, 0);
    // k = 0: all difference terms vanish by the x^n = x^0 (n < 0) convention.
    CHECK(lyapunov_value(state, h2, 0) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("lyapunov_value: one-dimensional hand example") {
    // m = 1, c = (1), x* = 1, x^0 = 0, x^1 = 2:
    // xi^1 = (2-1)^2 + 1 * (2-0)^2 / 1 = 5.
    LyapunovState state = make_state({1.0}, {1.0});
    const BlockLayout layout = BlockLayout::uniform(1);
    BlockVector x0(layout, {0.0});
    IterateHistory hist(layout, 4, x0);
    hist.push(x0, 0);
    hist.push(BlockVector(layout, {2.0}), 1);
    CHECK(lyapunov_value(state, hist, 1) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("lyapunov_value dominates the squared distance") {
    Rng rng(4);
    LyapunovState state = make_state({2.0, 1.0, 0.5}, {0.5, -0.5, 0.25});
    const BlockLayout layout = BlockLayout::uniform(3);
    BlockVector x0(layout);
    for (auto& v : x0.data) v = rng.next_gaussian();
    IterateHistory hist(layout, 8, x0);
    hist.push(x0, 0);
    for (long long k = 1; k <= 5; ++k) {
        BlockVector x(layout);
        for (auto& v : x.data) v = rng.next_gaussian();
        hist.push(x, k);
        CHECK(lyapunov_value(state, hist, k) >=
              squared_distance(hist.at(k), state.xstar) - 1e-15);
    }
}

TEST_CASE("fpr_norm: hand value and zero at the fixed point") {
    OperatorSpec op = make_s2i(2);
    BlockVector x(BlockLayout::uniform(2), {1.0, -2.0});
    // ||S x|| = ||2x|| = 2 sqrt(5).
    CHECK(fpr_norm(op, x) == doctest::Approx(2.0 * std::sqrt(5.0)).epsilon(1e-15));
    BlockVector xstar(BlockLayout::uniform(2), {0.0, 0.0});
    CHECK(fpr_norm(op, xstar) == 0.0);
}

TEST_CASE("exact_expected_next: eta = 0 leaves only the shifted tail") {
    LyapunovState state = make_state({1.0, 0.5}, {0.0});
    // m = 1 with two coefficients: at k = 1,
    // E[xi^2 | eta=0] = (x^1)^2 + c_2 (x^1 - x^0)^2.
    const BlockLayout layout = BlockLayout::uniform(1);
    BlockVector x0(layout, {3.0});
    IterateHistory hist(layout, 4, x0);
    hist.push(x0, 0);
    hist.push(BlockVector(layout, {2.0}), 1);
    OperatorSpec op = make_s2i(1);
    const double got =
        exact_expected_next(state, op, hist, 1, DelayVector::zeros(1), 0.0);
    CHECK(got == doctest::Approx(4.0 + 0.5 * 1.0).epsilon(1e-14));
}

TEST_CASE("exact_expected_next: m = 1 direct computation") {
    // m = 1, S = 2x, c = (c1): x^{k+1} = x^k - 2 eta xhat deterministic.
    LyapunovState state = make_state({0.8}, {0.0});
    const BlockLayout layout = BlockLayout::uniform(1);
    BlockVector x0(layout, {1.0});
    IterateHistory hist(layout, 4, x0);
    hist.push(x0, 0);
    hist.push(BlockVector(layout, {0.6}), 1);
    OperatorSpec op = make_s2i(1);
    const double eta = 0.25;
    // Delay 1: xhat = x^0 = 1, step = -2 eta = -0.5, x^2 = 0.1.
    const double x2 = 0.6 - eta * 2.0 * 1.0;
    const double expect = x2 * x2 + 0.8 * (x2 - 0.6) * (x2 - 0.6);
    const double got =
        exact_expected_next(state, op, hist, 1, DelayVector::constant(1, 1), eta);
    CHECK(got == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("exact_expected_next: m = 2 brute force over both block choices") {
    Rng rng(17);
    OperatorSpec op = make_s2i(2);
    LyapunovState state = make_state({1.2, 0.4}, {0.0, 0.0});
    const BlockLayout layout = BlockLayout::uniform(2);
    BlockVector x0(layout, {1.0, -0.5});
    IterateHistory hist(layout, 8, x0);
    hist.push(x0, 0);
    for (long long k = 1; k <= 3; ++k) {
        BlockVector x(layout);
        for (auto& v : x.data) v = 0.5 * rng.next_gaussian();
        hist.push(x, k);
    }
    const DelayVector d(std::vector<long long>{1, 0});
    const double eta = 0.3;
    const long long k = 3;

    const BlockVector xhat = hist.delayed_read(k, d);
    double brute = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        BlockVector xnext = hist.at(k);
        const auto sb = op.apply_S_block(xhat, i);
        xnext.data[i] -= eta * sb[0];
        IterateHistory h2 = hist;
        h2.push(xnext, k + 1);
        brute += lyapunov_value(state, h2, k + 1);
    }
    brute /= 2.0;
    const double got = exact_expected_next(state, op, hist, k, d, eta);
    CHECK(got == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("exact_expected_next rejects m > 64") {
    const std::size_t m = 65;
    OperatorSpec op = make_s2i(m);
    LyapunovState state(std::vector<double>{1.0}, BlockVector(BlockLayout::uniform(m)),
                        m);
    BlockVector x0(BlockLayout::uniform(m));
    IterateHistory hist(BlockLayout::uniform(m), 4, x0);
    hist.push(x0, 0);
    CHECK_THROWS_AS(
        exact_expected_next(state, op, hist, 0, DelayVector::zeros(m), 0.1),
        EnumerationTooLarge);
}

TEST_CASE("descent holds with eta <= h along a delayed run") {
    const std::size_t m = 2;
    OperatorSpec op = make_s2i(m);
    DescentChecker checker = make_checker(m, 0.5, 0.5, 200);
    const double h = checker.h_eff(1);
    const double eta = 0.9 * h;

    const BlockLayout layout = BlockLayout::uniform(m);
    BlockVector x0(layout, {1.0, -1.5});
    IterateHistory hist(layout, 260, x0);
    hist.push(x0, 0);
    Rng rng(21);
    const DelayVector d = DelayVector::constant(m, 1);
    for (long long k = 0; k < 200; ++k) {
        const DescentReport rep = checker.check_or_throw(op, hist, k, d, eta);
        CHECK(rep.slack >= 0.0);
        // Apply one random-block update to advance the trajectory.
        const BlockVector xhat = hist.delayed_read(k, d);
        BlockVector xnext = hist.at(k);
        const std::size_t i = static_cast<std::size_t>(rng.next_below(m));
        const auto sb = op.apply_S_block(xhat, i);
        xnext.data[i] -= eta * sb[0];
        hist.push(xnext, k + 1);
    }
}

TEST_CASE("descent slack is ~tolerance at the fixed point") {
    const std::size_t m = 2;
    OperatorSpec op = make_s2i(m);
    DescentChecker checker = make_checker(m, 0.5, 0.5, 200);
    const BlockLayout layout = BlockLayout::uniform(m);
    BlockVector xstar(layout, {0.0, 0.0});
    IterateHistory hist(layout, 60, xstar);
    hist.push(xstar, 0);
    hist.push(xstar, 1);
    const DescentReport rep =
        checker.check(op, hist, 1, DelayVector::constant(m, 1), 0.1);
    CHECK(rep.ok);
    CHECK(rep.expected_next == 0.0);
    CHECK(rep.slack == doctest::Approx(1e-12).epsilon(1e-3));
}

TEST_CASE("oversized steps are flagged: eta = 3h violates the clamped bound") {
    const std::size_t m = 2;
    OperatorSpec op = make_s2i(m);
    DescentChecker checker = make_checker(m, 0.9, 0.1, 50);
    const double h = checker.h_eff(1);
    const double eta = 3.0 * h;

    const BlockLayout layout = BlockLayout::uniform(m);
    BlockVector x0(layout, {1.0, -1.0});
    IterateHistory hist(layout, 60, x0);
    hist.push(x0, 0);
    Rng rng(5);
    const DelayVector d = DelayVector::constant(m, 1);
    bool violated = false;
    for (long long k = 0; k < 1000 && !violated; ++k) {
        const DescentReport rep = checker.check(op, hist, k, d, eta);
        if (!rep.ok) {
            violated = true;
            CHECK(rep.slack < 0.0);
            CHECK_THROWS_AS(checker.check_or_throw(op, hist, k, d, eta),
                            DescentViolated);
            break;
        }
        const BlockVector xhat = hist.delayed_read(k, d);
        BlockVector xnext = hist.at(k);
        const std::size_t i = static_cast<std::size_t>(rng.next_below(m));
        const auto sb = op.apply_S_block(xhat, i);
        xnext.data[i] -= eta * sb[0];
        hist.push(xnext, k + 1);
        if (norm(xnext) > 1e8) break;  // diverging; violation should have fired
    }
    CHECK(violated);
}

TEST_CASE("checker rejects delays beyond the truncation") {
    const std::size_t m = 2;
    OperatorSpec op = make_s2i(m);
    // Finitely supported epsilon keeps the truncation small and exact.
    const auto tail = DelayModel::bounded_arbitrary(1, 3).tail_probability();
    const auto eps = EpsilonSequence::largest_step(m, tail, 10);
    auto coeffs = lyapunov_coefficients(eps, &tail, CoefficientMode::Stochastic, 10);
    LyapunovState state(std::move(coeffs), BlockVector(BlockLayout::uniform(m)), m);
    DescentChecker checker(std::move(state), eps, CoefficientMode::Stochastic);
    const BlockLayout layout = BlockLayout::uniform(m);
    BlockVector x0(layout, {1.0, 1.0});
    IterateHistory hist(layout, 20, x0);
    hist.push(x0, 0);
    CHECK_THROWS_AS(checker.check(op, hist, 0, DelayVector::constant(m, 11), 0.1),
                    InvalidParameters);
}

TEST_CASE("fpr decreases along a convergent synchronous run") {
    // Synchronous KM iteration on a PSD problem: the FPR is monotone, so the
    // last-decile mean must be far below the first-decile mean.
    const std::size_t n = 8;
    DenseMatrix A = DenseMatrix::tridiagonal(n, 1.0, -0.3);
    std::vector<double> b(n, 1.0);
    OperatorSpec op = OperatorSpec::grad_quadratic(BlockLayout::uniform(n), A, b, 1.6);
    BlockVector x(BlockLayout::uniform(n));
    std::vector<double> fprs;
    for (int k = 0; k < 200; ++k) {
        fprs.push_back(op.fpr_norm(x));
        const BlockVector s = op.apply_S(x);
        for (std::size_t i = 0; i < n; ++i) x.data[i] -= 0.5 * s.data[i];
    }
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 20; ++i) first += fprs[static_cast<std::size_t>(i)];
    for (int i = 180; i < 200; ++i) last += fprs[static_cast<std::size_t>(i)];
    CHECK(last < 1e-3 * first);
}

TEST_CASE("lyapunov value is truncation-stable: K vs 2K") {
    // Coefficients decay geometrically, so extending K leaves xi unchanged to
    // 1e-12 once the history depth is covered.
    const std::size_t m = 2;
    const auto tail = DelayModel::geometric_tail(1, 0.5, 0.5).tail_probability();
    const auto epsK = EpsilonSequence::largest_step(m, tail, 200);
    const auto eps2K = EpsilonSequence::largest_step(m, tail, 400);
    auto cK = lyapunov_coefficients(epsK, &tail, CoefficientMode::Stochastic, 200);
    auto c2K = lyapunov_coefficients(eps2K, &tail, CoefficientMode::Stochastic, 400);
    const BlockLayout layout = BlockLayout::uniform(m);
    LyapunovState sK(std::move(cK), BlockVector(layout), m);
    LyapunovState s2K(std::move(c2K), BlockVector(layout), m);

    Rng rng(33);
    BlockVector x0(layout, {1.0, 2.0});
    IterateHistory hist(layout, 250, x0);
    hist.push(x0, 0);
    for (long long k = 1; k <= 220; ++k) {
        BlockVector x(layout);
        for (auto& v : x.data) v = rng.next_gaussian();
        hist.push(x, k);
    }
    const double a = lyapunov_value(sK, hist, 220);
    const double b = lyapunov_value(s2K, hist, 220);
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
}

TEST_CASE("LyapunovState validates coefficient monotonicity") {
    CHECK_THROWS_AS(make_state({0.5, 1.0}, {0.0, 0.0}), InvalidParameters);
    CHECK_NOTHROW(make_state({1.0, 1.0}, {0.0, 0.0}));
}
