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
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "arock/delays.hpp"
#include "arock/errors.hpp"

namespace arock {

// ============================================================================
// Step-size policies
//
// All infinite series are truncated at K terms.  When a tail is not exactly
// zero beyond the truncation (unbounded laws), the sum over the last K/2
// terms must be below 1e-10, which certifies the truncation error for the
// geometrically decaying sequences these formulas are built for.
//
// Closed forms implemented:
//   stochastic weak     h   = (1 + (1/sqrt(m)) sum P_l^{1/2}(l^{1/2}+l^{-1/2}))^-1
//   stochastic large    h   = (1 + (2/sqrt(m)) sum P_l^{1/2})^-1
//   generic stochastic  h   = (1 + (1/m) sum eps_l P_l + sum 1/eps_l)^-1
//   adaptive determ.    eta = c (1 + (1/sqrt(m))(1 + 1/g + (j+1)^{2+g}/(2+g)))^-1
//   generic determ.     h_j = (1 + (1/m) sum eps_l + sum_{i<=j} 1/eps_i)^-1
//   bounded truncated   eta = c (1 + sum_{l<=tau}((1/m) eps_l P_l + 1/eps_l))^-1
//                       eta = c (1 + sum_{i<=j} ((1/m) eps_i + 1/eps_i))^-1
//
// Canonical epsilon choices (the printed m^{-1/2} factor does not reproduce
// the closed forms above; the working factor is sqrt(m)):
//   WeakestCondition  eps_l = sqrt(m) P_l^{-1/2} l^{-1/2}
//   LargestStep       eps_l = sqrt(m) P_l^{-1/2}
//   PowerLaw(g)       eps_l = l^{1+g} sqrt(m)      (deterministic families)
// ============================================================================

constexpr double kRemainderBound = 1e-10;

class EpsilonSequence {
public:
    enum class Kind { WeakestCondition, LargestStep, PowerLaw, Custom };

    static EpsilonSequence weakest_condition(std::size_t m, TailDistribution tail,
                                             long long K = 1000) {
        EpsilonSequence e(Kind::WeakestCondition, m, K);
        e.tail_ = tail;
        return e;
    }

    static EpsilonSequence largest_step(std::size_t m, TailDistribution tail,
                                        long long K = 1000) {
        EpsilonSequence e(Kind::LargestStep, m, K);
        e.tail_ = tail;
        return e;
    }

    static EpsilonSequence power_law(double gamma, std::size_t m, long long K = 1000) {
        if (gamma <= 0.0) throw InvalidParameters("PowerLaw epsilon: gamma must be > 0");
        EpsilonSequence e(Kind::PowerLaw, m, K);
        e.gamma_ = gamma;
        return e;
    }

    static EpsilonSequence custom(std::function<double(long long)> gen,
                                  std::size_t m, long long K = 1000) {
        EpsilonSequence e(Kind::Custom, m, K);
        e.gen_ = std::move(gen);
        return e;
    }

    static EpsilonSequence custom(const std::vector<double>& values, std::size_t m,
                                  long long K = 1000) {
        // Indices beyond the provided values carry no penalty terms
        // (eps = +inf), matching the truncated-family convention.
        auto v = values;
        return custom(
            [v](long long l) {
                return (l >= 1 && l <= static_cast<long long>(v.size()))
                           ? v[static_cast<std::size_t>(l - 1)]
                           : std::numeric_limits<double>::infinity();
            },
            m, K);
    }

    // eps_l for l >= 1; +inf when the tail has already vanished (no penalty
    // term exists there).
    double operator()(long long l) const {
        if (l < 1) throw InvalidParameters("EpsilonSequence: l must be >= 1");
        const double sm = std::sqrt(static_cast<double>(m_));
        switch (kind_) {
            case Kind::WeakestCondition: {
                const double P = tail_(l);
                if (P <= 0.0) return std::numeric_limits<double>::infinity();
                return sm / (std::sqrt(P) * std::sqrt(static_cast<double>(l)));
            }
            case Kind::LargestStep: {
                const double P = tail_(l);
                if (P <= 0.0) return std::numeric_limits<double>::infinity();
                return sm / std::sqrt(P);
            }
            case Kind::PowerLaw:
                return std::pow(static_cast<double>(l), 1.0 + gamma_) * sm;
            case Kind::Custom: {
                const double v = gen_(l);
                if (!(v > 0.0))
                    throw InvalidParameters("EpsilonSequence: eps_" +
                                            std::to_string(l) + " must be > 0");
                return v;
            }
        }
        throw InvalidParameters("EpsilonSequence: unknown kind");
    }

    Kind kind() const { return kind_; }
    long long truncation() const { return K_; }
    std::size_t m() const { return m_; }

private:
    EpsilonSequence(Kind kind, std::size_t m, long long K)
        : kind_(kind), m_(m), K_(K) {
        if (m == 0) throw InvalidParameters("EpsilonSequence: m must be >= 1");
        if (K < 1) throw InvalidTruncation("EpsilonSequence: K must be >= 1");
    }

    Kind kind_;
    std::size_t m_;
    long long K_;
    double gamma_ = 1.0;
    TailDistribution tail_;
    std::function<double(long long)> gen_;
};

namespace detail {

// Sums term(l) for l = 1..K and certifies that the last K/2 terms contribute
// less than kRemainderBound (skipped when `exact` says the series is finitely
// supported inside K).
template <typename F>
double summed_with_remainder_check(F&& term, long long K, bool exact,
                                   const char* what) {
    double total = 0.0;
    double tail_sum = 0.0;
    const long long tail_from = K - K / 2 + 1;
    for (long long l = 1; l <= K; ++l) {
        const double t = term(l);
        if (!std::isfinite(t) || t < 0.0)
            throw SummabilityViolated(std::string(what) +
                                      ": non-finite or negative term at l=" +
                                      std::to_string(l));
        total += t;
        if (l >= tail_from) tail_sum += t;
    }
    if (!exact && tail_sum >= kRemainderBound)
        throw SummabilityViolated(std::string(what) + ": tail of the last K/2 terms is " +
                                  std::to_string(tail_sum) +
                                  " >= 1e-10; series not summable at this truncation");
    return total;
}

inline bool finitely_supported(const TailDistribution& tail, long long K) {
    return tail.bounded && tail.tau <= K;
}

// eps_l * P_l with the convention that an index carrying no penalty term
// (P_l = 0, or eps_l = +inf for truncated epsilon families) contributes 0.
inline double eps_times_P(const EpsilonSequence& eps, const TailDistribution& tail,
                          long long l) {
    const double P = tail(l);
    if (P <= 0.0) return 0.0;
    const double e = eps(l);
    if (std::isinf(e)) return 0.0;
    return e * P;
}

inline double one_over_eps(const EpsilonSequence& eps, long long l) {
    const double e = eps(l);
    return std::isinf(e) ? 0.0 : 1.0 / e;
}

}  // namespace detail

// --- Closed stochastic forms -------------------------------------------------

inline double stochastic_h_weak(const TailDistribution& tail, std::size_t m,
                                long long K = 1000) {
    if (m == 0) throw InvalidParameters("stochastic_h_weak: m must be >= 1");
    const bool exact = detail::finitely_supported(tail, K);
    const double sm = std::sqrt(static_cast<double>(m));
    double sum;
    try {
        sum = detail::summed_with_remainder_check(
            [&](long long l) {
                const double P = tail(l);
                if (P <= 0.0) return 0.0;
                const double sl = std::sqrt(static_cast<double>(l));
                return (1.0 / sm) * std::sqrt(P) * (sl + 1.0 / sl);
            },
            K, exact, "stochastic_h_weak");
    } catch (const SummabilityViolated& e) {
        throw NonSummableTail(e.what());
    }
    return 1.0 / (1.0 + sum);
}

inline double stochastic_h_large(const TailDistribution& tail, std::size_t m,
                                 long long K = 1000) {
    if (m == 0) throw InvalidParameters("stochastic_h_large: m must be >= 1");
    const bool exact = detail::finitely_supported(tail, K);
    const double sm = std::sqrt(static_cast<double>(m));
    double sum;
    try {
        sum = detail::summed_with_remainder_check(
            [&](long long l) {
                const double P = tail(l);
                return P <= 0.0 ? 0.0 : (2.0 / sm) * std::sqrt(P);
            },
            K, exact, "stochastic_h_large");
    } catch (const SummabilityViolated& e) {
        throw NonSummableTail(e.what());
    }
    return 1.0 / (1.0 + sum);
}

// --- Generic (epsilon-parameterized) forms ------------------------------------

inline double generic_stochastic_h(const EpsilonSequence& eps,
                                   const TailDistribution& tail, std::size_t m,
                                   long long K = 1000) {
    if (m == 0) throw InvalidParameters("generic_stochastic_h: m must be >= 1");
    const bool exact = detail::finitely_supported(tail, K);
    const double md = static_cast<double>(m);
    const double sum_epsP = detail::summed_with_remainder_check(
        [&](long long l) { return detail::eps_times_P(eps, tail, l) / md; }, K, exact,
        "generic_stochastic_h (eps_l P_l)");
    const double sum_inv = detail::summed_with_remainder_check(
        [&](long long l) { return detail::one_over_eps(eps, l); }, K,
        /*exact=*/false, "generic_stochastic_h (1/eps_l)");
    return 1.0 / (1.0 + sum_epsP + sum_inv);
}

inline double deterministic_eta(long long j, double c, double gamma, std::size_t m) {
    if (!(c > 0.0 && c < 1.0))
        throw InvalidParameters("deterministic_eta: c must lie in (0,1)");
    if (!(gamma > 0.0)) throw InvalidParameters("deterministic_eta: gamma must be > 0");
    if (j < 0) throw InvalidParameters("deterministic_eta: j must be >= 0");
    if (m == 0) throw InvalidParameters("deterministic_eta: m must be >= 1");
    const double sm = std::sqrt(static_cast<double>(m));
    const double bracket = 1.0 + 1.0 / gamma +
                           std::pow(static_cast<double>(j + 1), 2.0 + gamma) /
                               (2.0 + gamma);
    return c / (1.0 + bracket / sm);
}

inline double generic_deterministic_h(const EpsilonSequence& eps, long long j,
                                      std::size_t m, long long K = 1000) {
    if (m == 0) throw InvalidParameters("generic_deterministic_h: m must be >= 1");
    if (j < 0) throw InvalidParameters("generic_deterministic_h: j must be >= 0");
    const double md = static_cast<double>(m);
    // Sum eps_l must converge; the numeric remainder check rejects growing
    // sequences such as eps_l = 2^l.
    const double sum_eps = detail::summed_with_remainder_check(
        [&](long long l) {
            const double e = eps(l);
            return std::isinf(e) ? 0.0 : e / md;
        },
        K, /*exact=*/false, "generic_deterministic_h (eps_l)");
    double sum_inv = 0.0;
    for (long long i = 1; i <= std::min(j, K); ++i)
        sum_inv += detail::one_over_eps(eps, i);
    return 1.0 / (1.0 + sum_eps + sum_inv);
}

enum class CoefficientMode { Stochastic, Deterministic };

inline double bounded_truncated_eta(const EpsilonSequence& eps,
                                    const TailDistribution* tail, std::size_t m,
                                    CoefficientMode mode, long long j, double c,
                                    long long tau) {
    if (!(c > 0.0 && c < 1.0))
        throw InvalidParameters("bounded_truncated_eta: c must lie in (0,1)");
    if (tau < 0) throw InvalidTruncation("bounded_truncated_eta: tau must be >= 0");
    if (m == 0) throw InvalidParameters("bounded_truncated_eta: m must be >= 1");
    const double md = static_cast<double>(m);
    double sum = 0.0;
    if (mode == CoefficientMode::Stochastic) {
        if (tail == nullptr)
            throw InvalidParameters("bounded_truncated_eta: stochastic mode needs a tail");
        for (long long l = 1; l <= tau; ++l)
            sum += detail::eps_times_P(eps, *tail, l) / md + detail::one_over_eps(eps, l);
    } else {
        if (j < 0) throw InvalidParameters("bounded_truncated_eta: j must be >= 0");
        const long long upto = std::min(j, tau);
        for (long long i = 1; i <= upto; ++i) {
            const double e = eps(i);
            if (std::isinf(e)) continue;
            sum += e / md + 1.0 / e;
        }
    }
    return c / (1.0 + sum);
}

// Lyapunov coefficients c_1..c_K:
//   stochastic     c_i = sum_{l=i}^{K} eps_l P_l
//   deterministic  c_i = sum_{l=i}^{K} eps_l
// Backward accumulation keeps the recurrence c_{i+1} + eps_i (P_i) = c_i exact.
inline std::vector<double> lyapunov_coefficients(const EpsilonSequence& eps,
                                                 const TailDistribution* tail,
                                                 CoefficientMode mode,
                                                 long long K = 1000) {
    if (K < 1) throw InvalidTruncation("lyapunov_coefficients: K must be >= 1");
    std::vector<double> terms(static_cast<std::size_t>(K));
    for (long long l = 1; l <= K; ++l) {
        double t;
        if (mode == CoefficientMode::Stochastic) {
            if (tail == nullptr)
                throw InvalidParameters("lyapunov_coefficients: stochastic mode needs a tail");
            t = detail::eps_times_P(eps, *tail, l);
        } else {
            const double e = eps(l);
            t = std::isinf(e) ? 0.0 : e;
        }
        if (!std::isfinite(t) || t < 0.0)
            throw SummabilityViolated("lyapunov_coefficients: bad term at l=" +
                                      std::to_string(l));
        terms[static_cast<std::size_t>(l - 1)] = t;
    }
    // Certify the dropped tail is negligible unless the terms vanish exactly.
    double tail_sum = 0.0;
    for (long long l = K - K / 2 + 1; l <= K; ++l)
        tail_sum += terms[static_cast<std::size_t>(l - 1)];
    bool exact_zero_tail = true;
    for (long long l = K - K / 2 + 1; l <= K; ++l)
        if (terms[static_cast<std::size_t>(l - 1)] != 0.0) exact_zero_tail = false;
    if (!exact_zero_tail && tail_sum >= kRemainderBound)
        throw SummabilityViolated(
            "lyapunov_coefficients: coefficient tail not summable at K=" +
            std::to_string(K));

    std::vector<double> c(static_cast<std::size_t>(K));
    double acc = 0.0;
    for (long long i = K; i >= 1; --i) {
        acc += terms[static_cast<std::size_t>(i - 1)];
        c[static_cast<std::size_t>(i - 1)] = acc;
    }
    return c;
}

// --- Policy object -----------------------------------------------------------

enum class StepKind {
    StochasticWeak,
    StochasticLarge,
    GenericStochastic,
    DeterministicAdaptive,
    GenericDeterministic,
    BoundedTruncated,
};

inline std::string to_string(StepKind k) {
    switch (k) {
        case StepKind::StochasticWeak: return "StochasticWeak";
        case StepKind::StochasticLarge: return "StochasticLarge";
        case StepKind::GenericStochastic: return "GenericStochastic";
        case StepKind::DeterministicAdaptive: return "DeterministicAdaptive";
        case StepKind::GenericDeterministic: return "GenericDeterministic";
        case StepKind::BoundedTruncated: return "BoundedTruncated";
    }
    return "?";
}

class StepSizePolicy {
public:
    static StepSizePolicy stochastic_weak(double c, std::size_t m,
                                          TailDistribution tail, long long K = 1000) {
        StepSizePolicy p(StepKind::StochasticWeak, c, m, K);
        p.h_ = stochastic_h_weak(tail, m, K);
        return p;
    }

    static StepSizePolicy stochastic_large(double c, std::size_t m,
                                           TailDistribution tail, long long K = 1000) {
        StepSizePolicy p(StepKind::StochasticLarge, c, m, K);
        p.h_ = stochastic_h_large(tail, m, K);
        return p;
    }

    static StepSizePolicy generic_stochastic(double c, std::size_t m,
                                             const EpsilonSequence& eps,
                                             TailDistribution tail, long long K = 1000) {
        StepSizePolicy p(StepKind::GenericStochastic, c, m, K);
        p.h_ = generic_stochastic_h(eps, tail, m, K);
        return p;
    }

    static StepSizePolicy deterministic_adaptive(double c, double gamma,
                                                 std::size_t m) {
        StepSizePolicy p(StepKind::DeterministicAdaptive, c, m, 0);
        p.gamma_ = gamma;
        (void)deterministic_eta(0, c, gamma, m);  // parameter validation
        return p;
    }

    static StepSizePolicy generic_deterministic(double c, std::size_t m,
                                                const EpsilonSequence& eps,
                                                long long K = 1000) {
        StepSizePolicy p(StepKind::GenericDeterministic, c, m, K);
        // Precompute h_j = 1/(1 + (1/m) sum eps + prefix_j of 1/eps).
        const double h0 = generic_deterministic_h(eps, 0, m, K);
        p.det_base_ = 1.0 / h0;
        p.inv_eps_prefix_.resize(static_cast<std::size_t>(K) + 1, 0.0);
        double acc = 0.0;
        for (long long i = 1; i <= K; ++i) {
            acc += detail::one_over_eps(eps, i);
            p.inv_eps_prefix_[static_cast<std::size_t>(i)] = acc;
        }
        return p;
    }

    static StepSizePolicy bounded_truncated(double c, std::size_t m,
                                            const EpsilonSequence& eps,
                                            const TailDistribution* tail,
                                            CoefficientMode mode, long long tau) {
        StepSizePolicy p(StepKind::BoundedTruncated, c, m, tau);
        p.mode_ = mode;
        if (mode == CoefficientMode::Stochastic) {
            p.h_ = bounded_truncated_eta(eps, tail, m, mode, 0, c, tau) / c;
        } else {
            p.eta_by_j_.resize(static_cast<std::size_t>(tau) + 1);
            for (long long j = 0; j <= tau; ++j)
                p.eta_by_j_[static_cast<std::size_t>(j)] =
                    bounded_truncated_eta(eps, tail, m, mode, j, c, tau);
        }
        return p;
    }

    StepKind kind() const { return kind_; }
    double c() const { return c_; }

    // The theorem's maximal damping factor for the given current delay
    // (constant for stochastic kinds).
    double h(long long current_delay = 0) const {
        switch (kind_) {
            case StepKind::StochasticWeak:
            case StepKind::StochasticLarge:
            case StepKind::GenericStochastic:
                return h_;
            case StepKind::DeterministicAdaptive:
                return deterministic_eta(current_delay, c_, gamma_, m_) / c_;
            case StepKind::GenericDeterministic: {
                const long long j = std::min<long long>(
                    std::max<long long>(current_delay, 0),
                    static_cast<long long>(inv_eps_prefix_.size()) - 1);
                return 1.0 / (det_base_ + inv_eps_prefix_[static_cast<std::size_t>(j)]);
            }
            case StepKind::BoundedTruncated:
                if (mode_ == CoefficientMode::Stochastic) return h_;
                return eta_by_j_[static_cast<std::size_t>(std::min<long long>(
                           std::max<long long>(current_delay, 0),
                           static_cast<long long>(eta_by_j_.size()) - 1))] /
                       c_;
        }
        throw InvalidParameters("StepSizePolicy: unknown kind");
    }

    // eta^k = c * h(j(k)).
    double eta(long long current_delay = 0) const { return c_ * h(current_delay); }

private:
    StepSizePolicy(StepKind kind, double c, std::size_t m, long long K)
        : kind_(kind), c_(c), m_(m), K_(K) {
        if (!(c > 0.0 && c < 1.0))
            throw InvalidParameters("StepSizePolicy: c must lie in (0,1)");
        if (m == 0) throw InvalidParameters("StepSizePolicy: m must be >= 1");
    }

    StepKind kind_;
    double c_;
    std::size_t m_;
    long long K_;
    double h_ = 1.0;
    double gamma_ = 1.0;
    CoefficientMode mode_ = CoefficientMode::Stochastic;
    double det_base_ = 1.0;
    std::vector<double> inv_eps_prefix_;
    std::vector<double> eta_by_j_;
};

}  // namespace arock
