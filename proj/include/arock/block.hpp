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

#include "arock/errors.hpp"

namespace arock {

// ============================================================================
// Block-structured vectors and the bounded iterate history
//
// A point lives in H = H_1 x ... x H_m; blocks are contiguous runs of 64-bit
// scalars.  IterateHistory is a ring buffer of the most recent iterates that
// realizes delayed reads x^{k - j(k,i)} per block, with the convention that
// any index n < 0 reads the initial iterate x^0.
// ============================================================================

struct BlockLayout {
    std::vector<std::size_t> block_sizes;
    std::vector<std::size_t> offsets;  // prefix sums, offsets[m] == total()

    BlockLayout() = default;

    explicit BlockLayout(std::vector<std::size_t> sizes)
        : block_sizes(std::move(sizes)) {
        if (block_sizes.empty())
            throw LayoutMismatch("BlockLayout: need at least one block");
        offsets.resize(block_sizes.size() + 1, 0);
        for (std::size_t i = 0; i < block_sizes.size(); ++i) {
            if (block_sizes[i] == 0)
                throw LayoutMismatch("BlockLayout: zero-size block");
            offsets[i + 1] = offsets[i] + block_sizes[i];
        }
    }

    // m blocks of identical size.
    static BlockLayout uniform(std::size_t m, std::size_t block_size = 1) {
        return BlockLayout(std::vector<std::size_t>(m, block_size));
    }

    std::size_t blocks() const { return block_sizes.size(); }
    std::size_t total() const { return offsets.empty() ? 0 : offsets.back(); }

    bool operator==(const BlockLayout& o) const {
        return block_sizes == o.block_sizes;
    }
};

struct BlockVector {
    BlockLayout layout;
    std::vector<double> data;

    BlockVector() = default;

    explicit BlockVector(BlockLayout l, double fill = 0.0)
        : layout(std::move(l)), data(layout.total(), fill) {}

    BlockVector(BlockLayout l, std::vector<double> values)
        : layout(std::move(l)), data(std::move(values)) {
        if (data.size() != layout.total())
            throw LayoutMismatch("BlockVector: data length does not match layout");
    }

    std::size_t dim() const { return data.size(); }
    std::size_t blocks() const { return layout.blocks(); }

    double* block(std::size_t i) {
        check_block(i);
        return data.data() + layout.offsets[i];
    }
    const double* block(std::size_t i) const {
        check_block(i);
        return data.data() + layout.offsets[i];
    }
    std::size_t block_size(std::size_t i) const {
        check_block(i);
        return layout.block_sizes[i];
    }

    bool finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    void check_block(std::size_t i) const {
        if (i >= layout.blocks())
            throw BlockOutOfRange("block index " + std::to_string(i) +
                                  " out of range (m=" +
                                  std::to_string(layout.blocks()) + ")");
    }
};

inline double distance(const BlockVector& x, const BlockVector& y) {
    if (!(x.layout == y.layout))
        throw LayoutMismatch("distance: layouts differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double d = x.data[i] - y.data[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

inline double squared_distance(const BlockVector& x, const BlockVector& y) {
    if (!(x.layout == y.layout))
        throw LayoutMismatch("squared_distance: layouts differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double d = x.data[i] - y.data[i];
        acc += d * d;
    }
    return acc;
}

inline double norm(const BlockVector& x) {
    double acc = 0.0;
    for (double v : x.data) acc += v * v;
    return std::sqrt(acc);
}

// ----------------------------------------------------------------------------
// Delay vectors
// ----------------------------------------------------------------------------

struct DelayVector {
    std::vector<long long> j;  // j(k, i) >= 0, one entry per block

    DelayVector() = default;
    explicit DelayVector(std::vector<long long> components) : j(std::move(components)) {}

    static DelayVector zeros(std::size_t m) {
        return DelayVector(std::vector<long long>(m, 0));
    }
    static DelayVector constant(std::size_t m, long long value) {
        return DelayVector(std::vector<long long>(m, value));
    }

    // The current delay j(k) = max_i j(k, i).
    long long current() const {
        long long mx = 0;
        for (long long v : j) mx = std::max(mx, v);
        return mx;
    }
};

// ----------------------------------------------------------------------------
// Iterate history (ring buffer)
// ----------------------------------------------------------------------------

class IterateHistory {
public:
    IterateHistory(BlockLayout layout, std::size_t window, BlockVector x0)
        : layout_(std::move(layout)), window_(window), x0_(std::move(x0)) {
        if (window_ == 0)
            throw WindowExceeded("IterateHistory: window must be positive");
        if (!(x0_.layout == layout_))
            throw LayoutMismatch("IterateHistory: x0 layout mismatch");
        ring_.reserve(window_);
    }

    std::size_t window() const { return window_; }
    const BlockVector& x0() const { return x0_; }
    bool empty() const { return ring_.empty(); }
    long long top_index() const { return top_k_; }

    void push(const BlockVector& x, long long k) {
        if (!(x.layout == layout_))
            throw LayoutMismatch("IterateHistory::push: layout mismatch");
        const long long expected = ring_.empty() ? 0 : top_k_ + 1;
        if (k != expected)
            throw NonConsecutiveIndex("IterateHistory::push: expected k=" +
                                      std::to_string(expected) + ", got k=" +
                                      std::to_string(k));
        if (ring_.size() < window_) {
            ring_.push_back(x);
        } else {
            ring_[static_cast<std::size_t>(k % static_cast<long long>(window_))] = x;
        }
        top_k_ = k;
    }

    // Full iterate at index n (n < 0 maps to x0).
    const BlockVector& at(long long n) const {
        if (n < 0) return x0_;
        check_index(n);
        return ring_[static_cast<std::size_t>(n % static_cast<long long>(window_))];
    }

    // Pointer to block i of iterate n; avoids copying in hot loops.
    const double* block_at(long long n, std::size_t i) const {
        return at(n).block(i);
    }

    // Delayed read x-hat with x-hat_i = block i of x^{k - j(k,i)}.
    BlockVector delayed_read(long long k, const DelayVector& d) const {
        if (ring_.empty() || k != top_k_)
            throw WindowExceeded("delayed_read: k must be the most recent index");
        if (d.j.size() != layout_.blocks())
            throw LayoutMismatch("delayed_read: delay vector has wrong block count");
        BlockVector out(layout_);
        for (std::size_t i = 0; i < layout_.blocks(); ++i) {
            if (d.j[i] < 0)
                throw InvalidDelayModel("delayed_read: negative delay component");
            const long long n = k - d.j[i];
            const double* src = (n < 0) ? x0_.block(i) : checked_block(n, i);
            std::copy(src, src + layout_.block_sizes[i], out.block(i));
        }
        return out;
    }

private:
    const double* checked_block(long long n, std::size_t i) const {
        check_index(n);
        return ring_[static_cast<std::size_t>(n % static_cast<long long>(window_))]
            .block(i);
    }

    void check_index(long long n) const {
        if (ring_.empty() || n > top_k_ ||
            n <= top_k_ - static_cast<long long>(ring_.size()))
            throw WindowExceeded("IterateHistory: index " + std::to_string(n) +
                                 " outside window (top=" + std::to_string(top_k_) +
                                 ", W=" + std::to_string(window_) + ")");
    }

    BlockLayout layout_;
    std::size_t window_;
    BlockVector x0_;
    std::vector<BlockVector> ring_;
    long long top_k_ = -1;
};

}  // namespace arock
