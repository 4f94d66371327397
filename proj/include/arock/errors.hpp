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

#include <stdexcept>
#include <string>

namespace arock {

// ============================================================================
// Error hierarchy
//
// Every contract violation in the library throws a subclass of arock::Error,
// so callers (the CLI in particular) can map failures onto documented exit
// codes without string matching.
// ============================================================================

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- blockvec ---------------------------------------------------------------
class LayoutMismatch : public Error {
public:
    using Error::Error;
};
class WindowExceeded : public Error {
public:
    using Error::Error;
};
class NonConsecutiveIndex : public Error {
public:
    using Error::Error;
};

// --- operators --------------------------------------------------------------
class NonFinite : public Error {
public:
    using Error::Error;
};
class BlockOutOfRange : public Error {
public:
    using Error::Error;
};
class NegativeThreshold : public Error {
public:
    using Error::Error;
};
class InvalidBox : public Error {
public:
    using Error::Error;
};
class InvalidOperatorData : public Error {
public:
    using Error::Error;
};
class NonexpansivenessViolated : public Error {
public:
    NonexpansivenessViolated(const std::string& msg, double ratio)
        : Error(msg), ratio(ratio) {}
    double ratio;
};
class MaxIterationsExceeded : public Error {
public:
    using Error::Error;
};

// --- delays -----------------------------------------------------------------
class EmptySchedule : public Error {
public:
    using Error::Error;
};
class DeterministicModel : public Error {
public:
    using Error::Error;
};
class InvalidDelayModel : public Error {
public:
    using Error::Error;
};

// --- stepsize ---------------------------------------------------------------
class NonSummableTail : public Error {
public:
    using Error::Error;
};
class SummabilityViolated : public Error {
public:
    using Error::Error;
};
class InvalidParameters : public Error {
public:
    using Error::Error;
};
class InvalidTruncation : public Error {
public:
    using Error::Error;
};

// --- lyapunov ---------------------------------------------------------------
class EnumerationTooLarge : public Error {
public:
    using Error::Error;
};
class DescentViolated : public Error {
public:
    DescentViolated(const std::string& msg, long long k, double eta, double slack)
        : Error(msg), k(k), eta(eta), slack(slack) {}
    long long k;
    double eta;
    double slack;
};

// --- engine -----------------------------------------------------------------
class DivergenceDetected : public Error {
public:
    using Error::Error;
};
class WorkerPanic : public Error {
public:
    using Error::Error;
};

// --- harness ----------------------------------------------------------------
class ConfigError : public Error {
public:
    using Error::Error;
};
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace arock
