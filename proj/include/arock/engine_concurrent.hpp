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
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "arock/engine.hpp"
#include "arock/errors.hpp"

namespace arock {

// ============================================================================
// Concurrent engine
//
// p workers share one iterate.  Contract:
//   - every block read/write is atomic at block granularity (per-block
//     sequence lock; a size-1 block degenerates to a plain atomic scalar with
//     a version counter),
//   - NO cross-block snapshot consistency: a worker reads the shared iterate
//     block-by-block, so inconsistent reads are possible and intended,
//   - one global monotone update counter assigns k,
//   - delays are *measured*, not injected: when a worker reads block i the
//     global counter stands at g_i, and the update lands as number k, so the
//     recorded delay is j(k, i) = k - g_i.  The step-size policy is evaluated
//     on the delay measured at read time (the update that is about to land
//     adds one more unit the policy cannot see; documented one-update lag).
//
// Runs are replayable in distribution (per-worker RNG streams split from the
// master seed) but not bit-exactly: OS scheduling chooses the interleaving.
// ============================================================================

namespace detail {

class SharedIterate {
public:
    SharedIterate(const BlockLayout& layout, const BlockVector& x0)
        : layout_(layout), values_(layout.total()), seq_(layout.blocks()) {
        for (std::size_t i = 0; i < layout.total(); ++i)
            values_[i].store(x0.data[i], std::memory_order_relaxed);
        for (auto& s : seq_) s.store(0, std::memory_order_relaxed);
    }

    // Seqlock read of one block.
    void read_block(std::size_t i, double* out) const {
        const std::size_t off = layout_.offsets[i];
        const std::size_t len = layout_.block_sizes[i];
        while (true) {
            const std::uint64_t s1 = seq_[i].load(std::memory_order_acquire);
            if (s1 & 1) continue;  // writer in progress
            for (std::size_t r = 0; r < len; ++r)
                out[r] = values_[off + r].load(std::memory_order_relaxed);
            std::atomic_thread_fence(std::memory_order_acquire);
            if (seq_[i].load(std::memory_order_relaxed) == s1) return;
        }
    }

    // Atomic block-granular read-modify-write: x_i <- x_i - eta * s.
    void update_block(std::size_t i, const double* s, double eta,
                      std::mutex* write_guard) {
        const std::size_t off = layout_.offsets[i];
        const std::size_t len = layout_.block_sizes[i];
        std::lock_guard<std::mutex> lk(*write_guard);
        seq_[i].fetch_add(1, std::memory_order_acq_rel);
        for (std::size_t r = 0; r < len; ++r) {
            const double cur = values_[off + r].load(std::memory_order_relaxed);
            values_[off + r].store(cur - eta * s[r], std::memory_order_relaxed);
        }
        seq_[i].fetch_add(1, std::memory_order_release);
    }

    BlockVector snapshot_unsafe() const {
        BlockVector x(layout_);
        for (std::size_t i = 0; i < layout_.total(); ++i)
            x.data[i] = values_[i].load(std::memory_order_relaxed);
        return x;
    }

private:
    BlockLayout layout_;
    std::vector<std::atomic<double>> values_;
    mutable std::vector<std::atomic<std::uint64_t>> seq_;
};

}  // namespace detail

inline Trace run_concurrent(const RunConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    const OperatorSpec& op = cfg.problem.op;
    const BlockLayout& layout = op.layout();
    const std::size_t m = layout.blocks();
    const std::size_t p = std::max<std::size_t>(cfg.workers, 1);
    if (cfg.iterations < 1) throw InvalidParameters("run_concurrent: iterations < 1");

    const BlockVector x0 = cfg.x0 ? *cfg.x0 : BlockVector(layout);
    detail::SharedIterate shared(layout, x0);
    // One write lock per block; contention is rare (m >> p) and the critical
    // section is a handful of stores, so a mutex beats a CAS loop here while
    // keeping block updates lossless.
    std::vector<std::mutex> block_locks(m);

    std::atomic<long long> reserved{0};  // tickets: caps total updates
    std::atomic<long long> applied{0};   // the global update counter assigning k
    std::atomic<bool> failed{false};
    std::vector<unsigned long long> local_counts(p, 0);
    std::vector<std::vector<TraceRow>> local_rows(p);
    std::vector<long long> local_max_delay(p, 0);
    std::mutex error_mutex;
    std::string error_message;

    const BlockVector* xstar =
        cfg.problem.known_solution ? &*cfg.problem.known_solution : nullptr;

    auto worker = [&](std::size_t widx) {
        try {
            Rng rng = Rng::split(cfg.seed, widx);
            BlockVector local(layout);
            std::vector<long long> read_gen(m, 0);
            while (!failed.load(std::memory_order_relaxed)) {
                const long long ticket = reserved.fetch_add(1, std::memory_order_relaxed);
                if (ticket >= cfg.iterations) break;

                // Inconsistent (block-by-block) read of the shared iterate.
                for (std::size_t blk = 0; blk < m; ++blk) {
                    read_gen[blk] = applied.load(std::memory_order_acquire);
                    shared.read_block(blk, local.block(blk));
                }
                const long long g_now = applied.load(std::memory_order_acquire);
                long long j_read = 0;
                for (std::size_t blk = 0; blk < m; ++blk)
                    j_read = std::max(j_read, g_now - read_gen[blk]);

                const std::size_t i = static_cast<std::size_t>(rng.next_below(m));
                const std::vector<double> s = op.apply_S_block(local, i);
                const double eta = cfg.policy.eta(j_read);
                shared.update_block(i, s.data(), eta, &block_locks[i]);
                const long long k = applied.fetch_add(1, std::memory_order_acq_rel);
                ++local_counts[widx];

                long long j_k = 0;
                for (std::size_t blk = 0; blk < m; ++blk)
                    j_k = std::max(j_k, k - read_gen[blk]);
                local_max_delay[widx] = std::max(local_max_delay[widx], j_k);

                if ((k + 1) % cfg.metrics_every == 0) {
                    TraceRow row;
                    row.k = k + 1;
                    row.i_k = static_cast<long long>(i);
                    row.j_k = j_k;
                    row.eta_k = eta;
                    row.fpr_norm = op.fpr_norm(local);  // from this worker's read
                    if (xstar) row.dist_to_sol = distance(local, *xstar);
                    local_rows[widx].push_back(row);
                }
            }
        } catch (const std::exception& e) {
            failed.store(true, std::memory_order_relaxed);
            std::lock_guard<std::mutex> lk(error_mutex);
            if (error_message.empty())
                error_message = std::string("worker ") + std::to_string(widx) +
                                ": " + e.what();
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(p);
    for (std::size_t w = 0; w < p; ++w) threads.emplace_back(worker, w);
    for (auto& t : threads) t.join();

    if (failed.load())
        throw WorkerPanic("run_concurrent: " + error_message);

    Trace trace;
    trace.final_x = shared.snapshot_unsafe();
    trace.final_fpr = op.fpr_norm(trace.final_x);
    unsigned long long total = 0;
    for (unsigned long long c : local_counts) total += c;
    trace.updates = total;
    if (total != static_cast<unsigned long long>(applied.load()))
        throw WorkerPanic("run_concurrent: lost updates (counter " +
                          std::to_string(applied.load()) + " vs applied " +
                          std::to_string(total) + ")");
    for (auto& rows : local_rows)
        trace.rows.insert(trace.rows.end(), rows.begin(), rows.end());
    std::sort(trace.rows.begin(), trace.rows.end(),
              [](const TraceRow& a, const TraceRow& b) { return a.k < b.k; });
    for (long long d : local_max_delay)
        trace.max_measured_delay = std::max(trace.max_measured_delay, d);
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return trace;
}

}  // namespace arock
