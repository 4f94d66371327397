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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arock/block.hpp"
#include "arock/delays.hpp"
#include "arock/errors.hpp"
#include "arock/lyapunov.hpp"
#include "arock/operators.hpp"
#include "arock/rng.hpp"
#include "arock/stepsize.hpp"

namespace arock {

// ============================================================================
// Simulated engine
//
// Single-threaded, deterministic given the seed.  Per step k:
//   i(k) ~ uniform {0..m-1}, then j(k) from the delay model (delays are
//   *injected*, realizing the theorems' exact hypotheses), then
//   x^{k+1}_{i(k)} = x^k_{i(k)} - eta^k S_{i(k)}(xhat^k) with all other
//   blocks copied.  Divergence guard at ||x|| > 1e12.
// ============================================================================

enum class RunMode { Simulated, Concurrent };

struct TraceRow {
    long long k = 0;       // number of completed updates when the row was taken
    long long i_k = -1;    // block updated by the step that produced x^k
    long long j_k = 0;     // current delay of that step
    double eta_k = 0.0;
    double fpr_norm = 0.0;
    double dist_to_sol = -1.0;  // < 0 encodes "x* unknown"
    double xi = -1.0;           // < 0 encodes "checker off"
};

enum class RunStatus { Ok, Diverged, DescentViolation };

struct Trace {
    std::vector<TraceRow> rows;
    BlockVector final_x;
    RunStatus status = RunStatus::Ok;
    std::string message;
    double final_fpr = 0.0;
    double wall_seconds = 0.0;
    unsigned long long updates = 0;
    long long max_measured_delay = 0;  // concurrent engine instrumentation
};

struct RunConfig {
    FixedPointProblem problem;
    DelayModel delays;
    StepSizePolicy policy;
    long long iterations = 1000;
    std::uint64_t seed = 1;
    RunMode mode = RunMode::Simulated;
    std::size_t workers = 1;
    long long metrics_every = 1;
    std::size_t window = 0;  // 0 = derive from the delay model (and checker)
    std::optional<BlockVector> x0;

    RunConfig(FixedPointProblem p, DelayModel d, StepSizePolicy s)
        : problem(std::move(p)), delays(std::move(d)), policy(std::move(s)) {}
};

namespace detail {

inline std::size_t derive_window(const RunConfig& cfg, const DescentChecker* checker) {
    if (cfg.window != 0) return cfg.window;
    long long need = 2 * cfg.delays.max_delay_hint() + 2;
    if (checker != nullptr)
        need = std::max(need, checker->state().K() + 2);
    return static_cast<std::size_t>(need);
}

}  // namespace detail

inline Trace run_simulated(const RunConfig& cfg,
                           const DescentChecker* checker = nullptr) {
    const auto t_start = std::chrono::steady_clock::now();
    const OperatorSpec& op = cfg.problem.op;
    const BlockLayout& layout = op.layout();
    const std::size_t m = layout.blocks();
    if (cfg.iterations < 1) throw InvalidParameters("run_simulated: iterations < 1");
    if (cfg.metrics_every < 1) throw InvalidParameters("run_simulated: metrics_every < 1");

    const std::size_t window = detail::derive_window(cfg, checker);
    DelayModel delays = cfg.delays;  // local copy so the clamp hook is private
    if (delays.kind() == DelayKind::GeometricTail) {
        delays.set_clamp(static_cast<long long>(window) - 1);
    } else if (delays.max_delay_hint() > static_cast<long long>(window) - 1) {
        throw InvalidParameters(
            "run_simulated: delay model can exceed the history window (W=" +
            std::to_string(window) + ")");
    }

    BlockVector x = cfg.x0 ? *cfg.x0 : BlockVector(layout);
    if (!(x.layout == layout))
        throw LayoutMismatch("run_simulated: x0 layout mismatch");
    IterateHistory hist(layout, window, x);
    hist.push(x, 0);

    Rng rng(cfg.seed);
    const BlockVector* xstar =
        cfg.problem.known_solution ? &*cfg.problem.known_solution : nullptr;

    Trace trace;
    trace.final_x = x;

    long long last_i = -1, last_j = 0;
    double last_eta = 0.0;

    auto record_row = [&](long long k_completed) {
        TraceRow row;
        row.k = k_completed;
        row.i_k = last_i;
        row.j_k = last_j;
        row.eta_k = last_eta;
        const BlockVector& xk = hist.at(k_completed);
        row.fpr_norm = op.fpr_norm(xk);
        if (xstar) row.dist_to_sol = distance(xk, *xstar);
        if (checker) row.xi = lyapunov_value(checker->state(), hist, k_completed);
        trace.rows.push_back(row);
    };

    for (long long k = 0; k < cfg.iterations; ++k) {
        const std::size_t i = static_cast<std::size_t>(rng.next_below(m));
        const DelayVector d = delays.sample(k, rng);
        const long long j = d.current();
        const double eta = cfg.policy.eta(j);

        if (checker != nullptr) {
            const DescentReport rep = checker->check(op, hist, k, d, eta);
            if (!rep.ok) {
                trace.status = RunStatus::DescentViolation;
                trace.message = "descent inequality violated at k=" +
                                std::to_string(k) + ", slack=" +
                                std::to_string(rep.slack);
                break;
            }
        }

        const BlockVector xhat = hist.delayed_read(k, d);
        const std::vector<double> s = op.apply_S_block(xhat, i);
        double* xb = x.block(i);
        for (std::size_t r = 0; r < s.size(); ++r) xb[r] -= eta * s[r];

        last_i = static_cast<long long>(i);
        last_j = j;
        last_eta = eta;
        hist.push(x, k + 1);
        ++trace.updates;

        if (norm(x) > 1e12) {
            trace.status = RunStatus::Diverged;
            trace.message = "||x|| exceeded 1e12 at k=" + std::to_string(k + 1);
            break;
        }
        if ((k + 1) % cfg.metrics_every == 0) record_row(k + 1);
    }

    trace.final_x = x;
    trace.final_fpr = op.fpr_norm(x);
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return trace;
}

// ----------------------------------------------------------------------------
// Synchronous KM reference: x^{k+1} = x^k - eta S(x^k), full vector.
// ----------------------------------------------------------------------------

inline Trace run_km_reference(const OperatorSpec& op, const BlockVector& x0,
                              double eta, long long iterations,
                              long long metrics_every = 1) {
    if (!(eta > 0.0 && eta < 1.0))
        throw InvalidParameters("run_km_reference: eta must lie strictly in (0,1)");
    const auto t_start = std::chrono::steady_clock::now();
    BlockVector x = x0;
    Trace trace;
    for (long long k = 0; k < iterations; ++k) {
        const BlockVector s = op.apply_S(x);
        for (std::size_t r = 0; r < x.dim(); ++r) x.data[r] -= eta * s.data[r];
        ++trace.updates;
        if (norm(x) > 1e12) {
            trace.status = RunStatus::Diverged;
            trace.message = "||x|| exceeded 1e12 at k=" + std::to_string(k + 1);
            break;
        }
        if ((k + 1) % metrics_every == 0) {
            TraceRow row;
            row.k = k + 1;
            row.eta_k = eta;
            row.fpr_norm = op.fpr_norm(x);
            trace.rows.push_back(row);
        }
    }
    trace.final_x = x;
    trace.final_fpr = op.fpr_norm(x);
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return trace;
}

// ----------------------------------------------------------------------------
// Sequential random-block KM: the zero-delay baseline the simulated engine
// must match bit-exactly when it shares the same sampler.
// ----------------------------------------------------------------------------

inline BlockVector run_random_block_km(const OperatorSpec& op, const BlockVector& x0,
                                       double eta, long long iterations,
                                       std::uint64_t seed) {
    BlockVector x = x0;
    Rng rng(seed);
    const std::size_t m = op.layout().blocks();
    for (long long k = 0; k < iterations; ++k) {
        const std::size_t i = static_cast<std::size_t>(rng.next_below(m));
        const std::vector<double> s = op.apply_S_block(x, i);
        double* xb = x.block(i);
        for (std::size_t r = 0; r < s.size(); ++r) xb[r] -= eta * s[r];
    }
    return x;
}

}  // namespace arock
