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

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "arock/config.hpp"
#include "arock/engine.hpp"
#include "arock/engine_concurrent.hpp"
#include "arock/errors.hpp"
#include "arock/harness.hpp"
#include "arock/lyapunov.hpp"
#include "arock/trace_io.hpp"

namespace arock {

// ============================================================================
// CLI entry point
//
//   arock --config run.cfg [--seed N] [--mode sim|concurrent] [--out trace.csv]
//         [--check-descent] [--table2] [--m N]
//
// Exit codes: 0 success, 2 config error, 3 descent violation, 4 divergence.
// ============================================================================

inline int cli_run(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"asynchronous block-coordinate fixed-point solver"};
    std::string config_path;
    std::string out_path;
    std::string mode_flag;
    long long seed_flag = -1;
    bool check_descent = false;
    bool table2 = false;
    std::size_t table2_m = 100;

    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--seed", seed_flag, "override run.seed");
    app.add_option("--mode", mode_flag, "override run.mode (sim|concurrent)")
        ->check(CLI::IsMember({"sim", "concurrent"}));
    app.add_option("--out", out_path, "override out.trace_path");
    app.add_flag("--check-descent", check_descent,
                 "verify the Lyapunov descent inequality each step (sim mode)");
    app.add_flag("--table2", table2, "print the step-size table and exit");
    app.add_option("--m", table2_m, "block count for --table2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (table2) {
            out << table2_report(table2_m);
            return 0;
        }
        if (config_path.empty()) {
            err << "error: --config is required (or use --table2)\n";
            return 2;
        }

        ExperimentConfig cfg = parse_config_file(config_path);
        BuiltExperiment built = build_experiment(cfg);
        RunConfig& run = built.run;
        if (seed_flag >= 0) run.seed = static_cast<std::uint64_t>(seed_flag);
        if (mode_flag == "sim") run.mode = RunMode::Simulated;
        if (mode_flag == "concurrent") run.mode = RunMode::Concurrent;
        if (!out_path.empty()) built.trace_path = out_path;

        std::optional<DescentChecker> checker;
        if (check_descent) {
            if (run.mode != RunMode::Simulated)
                throw ConfigError("--check-descent requires sim mode");
            if (!run.delays.stochastic())
                throw ConfigError(
                    "--check-descent via the CLI supports stochastic delay models; "
                    "deterministic coefficient systems need a custom epsilon "
                    "sequence (library API)");
            const std::size_t m = run.problem.op.layout().blocks();
            if (m > 64)
                throw ConfigError(
                    "--check-descent enumerates blocks exactly and needs m <= 64");
            const TailDistribution tail = run.delays.tail_probability();
            const EpsilonSequence eps =
                EpsilonSequence::largest_step(m, tail, built.truncation);
            std::vector<double> coeffs = lyapunov_coefficients(
                eps, &tail, CoefficientMode::Stochastic, built.truncation);
            BlockVector xstar = run.problem.op.solve_reference(1e-11);
            run.problem.known_solution = xstar;
            checker.emplace(LyapunovState(std::move(coeffs), std::move(xstar), m),
                            eps, CoefficientMode::Stochastic);
        }

        Trace trace = (run.mode == RunMode::Concurrent)
                          ? run_concurrent(run)
                          : run_simulated(run, checker ? &*checker : nullptr);

        if (!built.trace_path.empty())
            emit_trace(trace, built.trace_path);
        else
            emit_trace(trace, out);

        if (trace.status == RunStatus::DescentViolation) {
            err << "error: " << trace.message << "\n";
            return 3;
        }
        if (trace.status == RunStatus::Diverged) {
            err << "error: " << trace.message << "\n";
            return 4;
        }
        err << "done: " << trace.updates << " updates, final ||Sx|| = "
            << trace.final_fpr << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DescentViolated& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceDetected& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace arock
