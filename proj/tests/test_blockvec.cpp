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

#include <vector>

#include "arock/block.hpp"
#include "arock/rng.hpp"

using namespace arock;

namespace {

BlockVector make_vec(const BlockLayout& layout, std::vector<double> v) {
    return BlockVector(layout, std::move(v));
}

}  // namespace

TEST_CASE("BlockLayout prefix sums and validation") {
    BlockLayout layout({2, 3, 1});
    CHECK(layout.blocks() == 3);
    CHECK(layout.total() == 6);
    CHECK(layout.offsets == std::vector<std::size_t>{0, 2, 5, 6});
    CHECK_THROWS_AS(BlockLayout(std::vector<std::size_t>{}), LayoutMismatch);
    CHECK_THROWS_AS(BlockLayout(std::vector<std::size_t>{1, 0, 2}), LayoutMismatch);
}

TEST_CASE("distance basics") {
    BlockLayout layout = BlockLayout::uniform(2);
    BlockVector x = make_vec(layout, {3.0, 4.0});
    BlockVector y = make_vec(layout, {0.0, 0.0});
    CHECK(distance(x, x) == 0.0);
    CHECK(distance(x, y) == doctest::Approx(5.0).epsilon(1e-15));  // 3-4-5
    CHECK(distance(x, y) == distance(y, x));
    BlockVector z(BlockLayout::uniform(3));
    CHECK_THROWS_AS(distance(x, z), LayoutMismatch);
}

TEST_CASE("distance symmetry and triangle inequality on random triples") {
    Rng rng(7);
    BlockLayout layout({1, 4, 2});
    for (int t = 0; t < 200; ++t) {
        BlockVector x(layout), y(layout), z(layout);
        for (auto& v : x.data) v = rng.next_gaussian();
        for (auto& v : y.data) v = rng.next_gaussian();
        for (auto& v : z.data) v = rng.next_gaussian();
        CHECK(distance(x, y) == distance(y, x));
        CHECK(distance(x, z) <= distance(x, y) + distance(y, z) + 1e-12);
    }
}

TEST_CASE("push / read contract") {
    BlockLayout layout = BlockLayout::uniform(2);
    BlockVector x0 = make_vec(layout, {1.0, 1.0});
    IterateHistory hist(layout, 3, x0);

    hist.push(x0, 0);
    CHECK(hist.at(0).data == x0.data);

    CHECK_THROWS_AS(hist.push(x0, 5), NonConsecutiveIndex);

    // Fill beyond capacity; the oldest index falls out of the window.
    for (long long k = 1; k <= 3; ++k) {
        BlockVector x = make_vec(layout, {double(k), double(k)});
        hist.push(x, k);
    }
    CHECK(hist.at(3).data == std::vector<double>{3.0, 3.0});
    CHECK(hist.at(1).data == std::vector<double>{1.0, 1.0});
    CHECK_THROWS_AS(hist.at(0), WindowExceeded);
    // Negative indices always map to x0 regardless of eviction.
    CHECK(hist.at(-1).data == x0.data);
}

TEST_CASE("delayed_read: zero delay is the identity read (bit-exact)") {
    BlockLayout layout({2, 1});
    BlockVector x0 = make_vec(layout, {0.25, -1.5, 3.0});
    IterateHistory hist(layout, 4, x0);
    hist.push(x0, 0);
    BlockVector x1 = make_vec(layout, {0.1, 0.2, 0.3});
    hist.push(x1, 1);

    BlockVector got = hist.delayed_read(1, DelayVector::zeros(2));
    CHECK(got.data == x1.data);
}

TEST_CASE("delayed_read: negative indices map to x0") {
    BlockLayout layout = BlockLayout::uniform(2);
    BlockVector x0 = make_vec(layout, {4.0, 9.0});
    IterateHistory hist(layout, 4, x0);
    hist.push(x0, 0);
    BlockVector got = hist.delayed_read(0, DelayVector::constant(2, 5));
    CHECK(got.data == x0.data);
}

TEST_CASE("delayed_read: per-block mixing (hand construction)") {
    BlockLayout layout = BlockLayout::uniform(2);
    BlockVector x0 = make_vec(layout, {1.0, 1.0});
    IterateHistory hist(layout, 4, x0);
    hist.push(x0, 0);
    hist.push(make_vec(layout, {2.0, 3.0}), 1);

    BlockVector got = hist.delayed_read(1, DelayVector(std::vector<long long>{1, 0}));
    CHECK(got.data == std::vector<double>{1.0, 3.0});
}

TEST_CASE("delayed_read: constant delay equals the stored iterate bit-exactly") {
    BlockLayout layout({2, 2});
    Rng rng(3);
    BlockVector x0(layout);
    for (auto& v : x0.data) v = rng.next_gaussian();
    IterateHistory hist(layout, 8, x0);
    hist.push(x0, 0);
    std::vector<BlockVector> all{x0};
    for (long long k = 1; k <= 6; ++k) {
        BlockVector x(layout);
        for (auto& v : x.data) v = rng.next_gaussian();
        hist.push(x, k);
        all.push_back(x);
    }
    for (long long c = 0; c <= 6; ++c) {
        BlockVector got = hist.delayed_read(6, DelayVector::constant(2, c));
        CHECK(got.data == all[static_cast<std::size_t>(6 - c)].data);
    }
}

TEST_CASE("delayed_read window violations and layout checks") {
    BlockLayout layout = BlockLayout::uniform(2);
    BlockVector x0(layout);
    IterateHistory hist(layout, 2, x0);
    hist.push(x0, 0);
    for (long long k = 1; k <= 4; ++k) hist.push(x0, k);

    // k - j = 1 is nonnegative but older than the window.
    CHECK_THROWS_AS(hist.delayed_read(4, DelayVector::constant(2, 3)), WindowExceeded);
    // Delay reaching below zero is fine (maps to x0).
    CHECK_NOTHROW(hist.delayed_read(4, DelayVector::constant(2, 5)));
    // Wrong number of components.
    CHECK_THROWS_AS(hist.delayed_read(4, DelayVector::zeros(3)), LayoutMismatch);
    // Reads must target the top index.
    CHECK_THROWS_AS(hist.delayed_read(3, DelayVector::zeros(2)), WindowExceeded);
}

TEST_CASE("DelayVector current delay") {
    CHECK(DelayVector(std::vector<long long>{0, 3, 1}).current() == 3);
    CHECK(DelayVector::zeros(4).current() == 0);
    CHECK(DelayVector::constant(3, 7).current() == 7);
}
