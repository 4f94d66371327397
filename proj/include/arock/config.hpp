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
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "arock/delays.hpp"
#include "arock/engine.hpp"
#include "arock/errors.hpp"
#include "arock/matrix.hpp"
#include "arock/operators.hpp"
#include "arock/stepsize.hpp"

namespace arock {

// ============================================================================
// Experiment configuration
//
// Plain-text key = value pairs, one per line, '#' starts a comment.  Unknown
// keys are rejected.  Recognized keys:
//
//   problem.kind         grad_quadratic | forward_backward_l1 |
//                        projected_gradient_box | linear_psd | linear_jacobi
//   problem.matrix_file  dense matrix, first line "N N", then N rows
//   problem.b_file       N scalars
//   problem.L            Lipschitz constant L (or spectral bound M)
//   problem.lambda       l1 weight (forward_backward_l1)
//   problem.bounds       "lo,hi" scalars applied to every coordinate
//   delay.kind           zero | bounded | uniform | geometric | schedule
//   delay.tau            support bound (bounded/uniform)
//   delay.r, delay.C     geometric law parameters
//   delay.B              evenness bound override
//   delay.schedule_file  one line per k, m space-separated integers
//   step.kind            stochastic_weak | stochastic_large |
//                        deterministic_adaptive
//   step.c               damping fraction in (0,1)
//   step.gamma           adaptive exponent
//   step.truncation      series truncation K
//   run.mode             sim | concurrent
//   run.iterations       total updates
//   run.workers          worker count (concurrent)
//   run.seed             64-bit master seed
//   run.metrics_every    trace cadence
//   out.trace_path       CSV output path
//
// Blocks are size-1 (one scalar per block), matching the zoo's defaults.
// ============================================================================

struct ExperimentConfig {
    std::map<std::string, std::string> values;

    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {
            "problem.kind",   "problem.matrix_file", "problem.b_file",
            "problem.L",      "problem.lambda",      "problem.bounds",
            "delay.kind",     "delay.tau",           "delay.r",
            "delay.C",        "delay.B",             "delay.schedule_file",
            "step.kind",      "step.c",              "step.gamma",
            "step.truncation", "run.mode",           "run.iterations",
            "run.workers",    "run.seed",            "run.metrics_every",
            "out.trace_path",
        };
        return keys;
    }

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string get(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end())
            throw ConfigError("missing required config key: " + key);
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const {
        try {
            std::size_t pos = 0;
            const std::string s = get(key);
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + " is not a number: '" +
                              get(key) + "'");
        }
    }

    long long get_int(const std::string& key) const {
        try {
            std::size_t pos = 0;
            const std::string s = get(key);
            const long long v = std::stoll(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + " is not an integer: '" +
                              get(key) + "'");
        }
    }
};

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!ExperimentConfig::known_keys().count(key))
            throw ConfigError("unknown config key: " + key);
        if (cfg.values.count(key))
            throw ConfigError("duplicate config key: " + key);
        if (value.empty())
            throw ConfigError("config key " + key + " has an empty value");
        cfg.values[key] = value;
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// Canonical serialization (sorted keys); parse(serialize(cfg)) == cfg.
inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    for (const auto& [k, v] : cfg.values) out << k << " = " << v << "\n";
    return out.str();
}

// ----------------------------------------------------------------------------
// Building runnable objects out of a parsed config
// ----------------------------------------------------------------------------

struct BuiltExperiment {
    RunConfig run;
    std::string trace_path;
    long long truncation;
};

inline OperatorSpec build_operator(const ExperimentConfig& cfg) {
    const std::string kind = cfg.get("problem.kind");
    DenseMatrix A;
    try {
        A = load_matrix(cfg.get("problem.matrix_file"));
    } catch (const IoError& e) {
        throw ConfigError(std::string("problem.matrix_file: ") + e.what());
    }
    std::vector<double> b;
    try {
        b = load_vector(cfg.get("problem.b_file"), A.n);
    } catch (const IoError& e) {
        throw ConfigError(std::string("problem.b_file: ") + e.what());
    }
    BlockLayout layout = BlockLayout::uniform(A.n, 1);
    try {
        if (kind == "grad_quadratic")
            return OperatorSpec::grad_quadratic(layout, A, b,
                                                cfg.get_double("problem.L"));
        if (kind == "forward_backward_l1")
            return OperatorSpec::forward_backward_l1(layout, A, b,
                                                     cfg.get_double("problem.L"),
                                                     cfg.get_double("problem.lambda"));
        if (kind == "projected_gradient_box") {
            const std::string bounds = cfg.get("problem.bounds");
            const std::size_t comma = bounds.find(',');
            if (comma == std::string::npos)
                throw ConfigError("problem.bounds: expected 'lo,hi'");
            const double lo = std::stod(trim(bounds.substr(0, comma)));
            const double hi = std::stod(trim(bounds.substr(comma + 1)));
            return OperatorSpec::projected_gradient_box(
                layout, A, b, cfg.get_double("problem.L"),
                std::vector<double>(A.n, lo), std::vector<double>(A.n, hi));
        }
        if (kind == "linear_psd")
            return OperatorSpec::linear_psd(layout, A, b, cfg.get_double("problem.L"));
        if (kind == "linear_jacobi")
            return OperatorSpec::linear_jacobi(layout, A, b);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("problem: ") + e.what());
    }
    throw ConfigError("problem.kind: unknown kind '" + kind + "'");
}

inline DelayModel build_delay_model(const ExperimentConfig& cfg, std::size_t m) {
    const std::string kind = cfg.get_or("delay.kind", "zero");
    const long long B = cfg.has("delay.B") ? cfg.get_int("delay.B") : -1;
    try {
        if (kind == "zero") return DelayModel::zero(m);
        if (kind == "bounded")
            return DelayModel::bounded_arbitrary(m, cfg.get_int("delay.tau"), B);
        if (kind == "uniform")
            return DelayModel::uniform_on_range(m, cfg.get_int("delay.tau"), B);
        if (kind == "geometric") {
            const double r = cfg.get_double("delay.r");
            const double C =
                cfg.has("delay.C") ? cfg.get_double("delay.C") : (1.0 - r);
            return DelayModel::geometric_tail(m, C, r, B < 0 ? 4 : B);
        }
        if (kind == "schedule")
            return DelayModel::deterministic_from_file(
                m, cfg.get("delay.schedule_file"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("delay: ") + e.what());
    }
    throw ConfigError("delay.kind: unknown kind '" + kind + "'");
}

inline StepSizePolicy build_step_policy(const ExperimentConfig& cfg,
                                        const DelayModel& delays, std::size_t m) {
    const std::string kind = cfg.get_or("step.kind", "stochastic_large");
    const double c = cfg.has("step.c") ? cfg.get_double("step.c") : 0.9;
    const long long K =
        cfg.has("step.truncation") ? cfg.get_int("step.truncation") : 1000;
    try {
        if (kind == "stochastic_weak")
            return StepSizePolicy::stochastic_weak(c, m, delays.tail_probability(), K);
        if (kind == "stochastic_large")
            return StepSizePolicy::stochastic_large(c, m, delays.tail_probability(), K);
        if (kind == "deterministic_adaptive")
            return StepSizePolicy::deterministic_adaptive(
                c, cfg.has("step.gamma") ? cfg.get_double("step.gamma") : 1.0, m);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("step: ") + e.what());
    }
    throw ConfigError("step.kind: unknown kind '" + kind + "'");
}

inline BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
    OperatorSpec op = build_operator(cfg);
    const std::size_t m = op.layout().blocks();
    DelayModel delays = build_delay_model(cfg, m);
    StepSizePolicy policy = build_step_policy(cfg, delays, m);
    FixedPointProblem problem(std::move(op));

    RunConfig run(std::move(problem), std::move(delays), std::move(policy));
    run.iterations =
        cfg.has("run.iterations") ? cfg.get_int("run.iterations") : 1000;
    if (run.iterations < 1) throw ConfigError("run.iterations must be >= 1");
    run.seed = cfg.has("run.seed")
                   ? static_cast<std::uint64_t>(cfg.get_int("run.seed"))
                   : 1;
    const std::string mode = cfg.get_or("run.mode", "sim");
    if (mode == "sim")
        run.mode = RunMode::Simulated;
    else if (mode == "concurrent")
        run.mode = RunMode::Concurrent;
    else
        throw ConfigError("run.mode: expected 'sim' or 'concurrent', got '" + mode +
                          "'");
    run.workers = cfg.has("run.workers")
                      ? static_cast<std::size_t>(cfg.get_int("run.workers"))
                      : 1;
    if (run.workers < 1) throw ConfigError("run.workers must be >= 1");
    run.metrics_every =
        cfg.has("run.metrics_every") ? cfg.get_int("run.metrics_every") : 1;
    if (run.metrics_every < 1) throw ConfigError("run.metrics_every must be >= 1");

    BuiltExperiment built{std::move(run), cfg.get_or("out.trace_path", ""),
                          cfg.has("step.truncation") ? cfg.get_int("step.truncation")
                                                     : 1000};
    return built;
}

}  // namespace arock
