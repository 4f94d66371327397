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
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "arock/block.hpp"
#include "arock/errors.hpp"
#include "arock/rng.hpp"

namespace arock {

// ============================================================================
// Delay models
//
// Stochastic kinds draw a scalar current delay j(k) from the kind's law and
// then spread it over blocks in an "evenly old" pattern: t is uniform on
// {0..min(B, j)}^m conditioned on min_i t_i = 0 (rejection sampling), and
// j(k,i) = j(k) - t_i.  This guarantees max_i j(k,i) = j(k) and a spread of at
// most B.  DeterministicSchedule plays back (and cycles) an explicit list.
//
// Geometric convention: P[j = l] = C r^l for l >= 1 and
// P[j = 0] = 1 - C r/(1-r), which requires C r/(1-r) <= 1.  The tail is then
// exactly P_l = min(1, C r^l / (1-r)); choosing C = 1-r recovers the plain
// geometric law P[j = l] = (1-r) r^l with tail r^l.
// ============================================================================

enum class DelayKind {
    Zero,
    BoundedArbitrary,
    UniformOnRange,
    GeometricTail,
    DeterministicSchedule,
};

inline std::string to_string(DelayKind k) {
    switch (k) {
        case DelayKind::Zero: return "Zero";
        case DelayKind::BoundedArbitrary: return "BoundedArbitrary";
        case DelayKind::UniformOnRange: return "UniformOnRange";
        case DelayKind::GeometricTail: return "GeometricTail";
        case DelayKind::DeterministicSchedule: return "DeterministicSchedule";
    }
    return "?";
}

struct TailDistribution {
    DelayKind kind = DelayKind::Zero;
    long long tau = 0;  // support bound for bounded kinds
    double C = 1.0;
    double r = 0.5;
    bool bounded = true;

    // P_l = P[j(k) >= l].
    double operator()(long long l) const {
        if (l <= 0) return 1.0;
        switch (kind) {
            case DelayKind::Zero:
                return 0.0;
            case DelayKind::BoundedArbitrary:
                return l <= tau ? 1.0 : 0.0;
            case DelayKind::UniformOnRange:
                return l <= tau
                           ? 1.0 - static_cast<double>(l) / static_cast<double>(tau + 1)
                           : 0.0;
            case DelayKind::GeometricTail:
                return std::min(1.0, C * std::pow(r, static_cast<double>(l)) / (1.0 - r));
            case DelayKind::DeterministicSchedule:
                break;
        }
        throw DeterministicModel("tail_probability: deterministic model has no tail law");
    }
};

class DelayModel {
public:
    // --- factories ------------------------------------------------------------

    static DelayModel zero(std::size_t m) {
        DelayModel mo(DelayKind::Zero, m);
        return mo;
    }

    // Worst-case bounded model: j(k) = tau always (the only law whose tail is
    // P_l = 1 for every l <= tau).
    static DelayModel bounded_arbitrary(std::size_t m, long long tau,
                                        long long B = -1) {
        if (tau < 0) throw InvalidDelayModel("BoundedArbitrary: tau < 0");
        DelayModel mo(DelayKind::BoundedArbitrary, m);
        mo.tau_ = tau;
        mo.B_ = (B < 0) ? tau : B;
        return mo;
    }

    static DelayModel uniform_on_range(std::size_t m, long long tau,
                                       long long B = -1) {
        if (tau < 0) throw InvalidDelayModel("UniformOnRange: tau < 0");
        DelayModel mo(DelayKind::UniformOnRange, m);
        mo.tau_ = tau;
        mo.B_ = (B < 0) ? tau : B;
        return mo;
    }

    static DelayModel geometric_tail(std::size_t m, double C, double r,
                                     long long B = 4) {
        if (!(r > 0.0 && r < 1.0)) throw InvalidDelayModel("GeometricTail: need 0 < r < 1");
        if (!(C > 0.0)) throw InvalidDelayModel("GeometricTail: need C > 0");
        if (C * r / (1.0 - r) > 1.0 + 1e-12)
            throw InvalidDelayModel(
                "GeometricTail: C r/(1-r) > 1 is not a probability law");
        DelayModel mo(DelayKind::GeometricTail, m);
        mo.C_ = C;
        mo.r_ = r;
        mo.B_ = std::max<long long>(B, 0);
        return mo;
    }

    static DelayModel deterministic(std::size_t m,
                                    std::vector<DelayVector> schedule) {
        if (schedule.empty()) throw EmptySchedule("DeterministicSchedule: empty");
        for (const auto& d : schedule) {
            if (d.j.size() != m)
                throw InvalidDelayModel("DeterministicSchedule: entry block count != m");
            for (long long v : d.j)
                if (v < 0) throw InvalidDelayModel("DeterministicSchedule: negative delay");
        }
        DelayModel mo(DelayKind::DeterministicSchedule, m);
        mo.schedule_ = std::move(schedule);
        return mo;
    }

    // Schedule file: one line per k, m space-separated integers.
    static DelayModel deterministic_from_file(std::size_t m, const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open schedule file: " + path);
        std::vector<DelayVector> sched;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::istringstream ls(line);
            std::vector<long long> row;
            long long v;
            while (ls >> v) row.push_back(v);
            if (row.size() != m)
                throw IoError("schedule file " + path + ": line has " +
                              std::to_string(row.size()) + " entries, expected m=" +
                              std::to_string(m));
            sched.emplace_back(std::move(row));
        }
        return deterministic(m, std::move(sched));
    }

    // --- accessors -------------------------------------------------------------

    DelayKind kind() const { return kind_; }
    std::size_t m() const { return m_; }
    long long tau() const { return tau_; }
    double C() const { return C_; }
    double r() const { return r_; }
    long long evenness_bound() const { return B_; }
    bool stochastic() const { return kind_ != DelayKind::DeterministicSchedule; }

    TailDistribution tail_probability() const {
        if (!stochastic())
            throw DeterministicModel("tail_probability: DeterministicSchedule");
        TailDistribution t;
        t.kind = kind_;
        t.tau = tau_;
        t.C = C_;
        t.r = r_;
        t.bounded = kind_ != DelayKind::GeometricTail;
        return t;
    }

    // Largest delay this model can emit, or the clamp value for unbounded
    // kinds (chosen so the clamp probability is below 2^-64; see max_delay_hint).
    long long max_delay_hint() const {
        switch (kind_) {
            case DelayKind::Zero:
                return 0;
            case DelayKind::BoundedArbitrary:
            case DelayKind::UniformOnRange:
                return tau_;
            case DelayKind::GeometricTail: {
                // Smallest l with C r^l/(1-r) < 2^-64.
                const double ln_r = std::log(r_);
                const double target = std::log(std::pow(2.0, -64.0) * (1.0 - r_) / C_);
                return static_cast<long long>(std::ceil(target / ln_r)) + 1;
            }
            case DelayKind::DeterministicSchedule: {
                long long mx = 0;
                for (const auto& d : schedule_) mx = std::max(mx, d.current());
                return mx;
            }
        }
        return 0;
    }

    DelayVector sample(long long k, Rng& rng) const {
        if (k < 0) throw InvalidDelayModel("sample: k < 0");
        switch (kind_) {
            case DelayKind::Zero:
                return DelayVector::zeros(m_);
            case DelayKind::DeterministicSchedule:
                return schedule_[static_cast<std::size_t>(
                    k % static_cast<long long>(schedule_.size()))];
            default:
                break;
        }
        long long j = draw_scalar(rng);
        if (clamp_ >= 0) j = std::min(j, clamp_);
        return spread(j, rng);
    }

    // Engine hook: cap sampled scalar delays (used so an unbounded law cannot
    // step outside the finite history window; the cap is chosen to be hit
    // with probability < 2^-64).
    void set_clamp(long long clamp) { clamp_ = clamp; }

private:
    explicit DelayModel(DelayKind kind, std::size_t m) : kind_(kind), m_(m) {
        if (m == 0) throw InvalidDelayModel("DelayModel: m must be >= 1");
    }

    long long draw_scalar(Rng& rng) const {
        switch (kind_) {
            case DelayKind::BoundedArbitrary:
                // Tail P_l = 1 for every l <= tau forces j >= tau a.s., i.e.
                // the constant law j = tau.
                return tau_;
            case DelayKind::UniformOnRange:
                return static_cast<long long>(
                    rng.next_below(static_cast<std::uint64_t>(tau_ + 1)));
            case DelayKind::GeometricTail: {
                // Inverse-tail sampling of P[j = l] = C r^l (l >= 1).
                const double u = rng.next_unit_open_zero();  // u in (0, 1]
                const double p1 = C_ * r_ / (1.0 - r_);      // P[j >= 1]
                if (u > p1) return 0;
                // Smallest l >= 1 with tail(l+1) <= u keeps j = l, i.e.
                // j = floor(log(u (1-r)/C) / log r) since tail(l) = C r^l/(1-r).
                const double l = std::floor(std::log(u * (1.0 - r_) / C_) / std::log(r_));
                return std::max<long long>(1, static_cast<long long>(l));
            }
            default:
                return 0;
        }
    }

    DelayVector spread(long long j, Rng& rng) const {
        DelayVector d = DelayVector::constant(m_, j);
        const long long spread_max = std::min(B_, j);
        if (m_ == 1 || spread_max == 0) return d;
        std::vector<long long> t(m_);
        while (true) {
            bool has_zero = false;
            for (std::size_t i = 0; i < m_; ++i) {
                t[i] = static_cast<long long>(
                    rng.next_below(static_cast<std::uint64_t>(spread_max + 1)));
                if (t[i] == 0) has_zero = true;
            }
            if (has_zero) break;
        }
        for (std::size_t i = 0; i < m_; ++i) d.j[i] = j - t[i];
        return d;
    }

    DelayKind kind_;
    std::size_t m_;
    long long tau_ = 0;
    double C_ = 1.0;
    double r_ = 0.5;
    long long B_ = 0;
    long long clamp_ = -1;
    std::vector<DelayVector> schedule_;
};

inline long long current_delay(const DelayVector& d) { return d.current(); }

// Worst-case node-timing helper: p workers whose update times lie in [a, b]
// yield the delay bound tau = p (b/a + 1), exposed as a BoundedArbitrary model.
inline long long worst_case_delay_bound(std::size_t p, double a, double b) {
    if (p == 0 || a <= 0.0 || b < a)
        throw InvalidParameters("worst_case_delay_bound: need p >= 1, 0 < a <= b");
    return static_cast<long long>(
        std::ceil(static_cast<double>(p) * (b / a + 1.0)));
}

inline DelayModel worst_case_bounded_model(std::size_t m, std::size_t p, double a,
                                           double b) {
    return DelayModel::bounded_arbitrary(m, worst_case_delay_bound(p, a, b));
}

}  // namespace arock
