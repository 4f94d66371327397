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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "arock/cli.hpp"
#include "arock/config.hpp"
#include "arock/harness.hpp"
#include "arock/trace_io.hpp"

using namespace arock;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Identity matrix + right-hand side fixtures shared by the CLI tests.
struct Fixture {
    Fixture() {
        write_file("th_A.txt", "2 2\n1 0\n0 1\n");
        write_file("th_b0.txt", "0\n0\n");
        write_file("th_b1.txt", "1\n1\n");
        // Indefinite symmetric matrix: eigenvalues {-0.5, 1}.  Spectral-bound
        // validation tracks the dominant magnitude, so L = 1 is accepted, but
        // the negative eigenvalue makes the induced map expansive and the run
        // diverges -- exercising the divergence exit code end to end.
        write_file("th_A_indef.txt", "2 2\n-0.5 0\n0 1\n");
    }
    ~Fixture() {
        for (const char* f : {"th_A.txt", "th_b0.txt", "th_b1.txt",
                              "th_A_indef.txt"})
            std::remove(f);
    }
};

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
    std::vector<const char*> argv;
    argv.push_back("arock_cli");
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

Trace make_zero_delay_trace(long long iterations, long long metrics_every,
                            std::uint64_t seed) {
    OperatorSpec op = OperatorSpec::grad_quadratic(
        BlockLayout::uniform(4), DenseMatrix::tridiagonal(4, 1.0, -0.3),
        std::vector<double>(4, 1.0), 1.6);
    RunConfig cfg(FixedPointProblem(op), DelayModel::zero(4),
                  StepSizePolicy::stochastic_large(
                      0.5, 4, DelayModel::zero(1).tail_probability()));
    cfg.iterations = iterations;
    cfg.metrics_every = metrics_every;
    cfg.seed = seed;
    return run_simulated(cfg);
}

}  // namespace

TEST_CASE("config: parse, comments, whitespace, round trip") {
    const std::string text =
        "# experiment\n"
        "problem.kind = grad_quadratic\n"
        "  run.iterations=250   # inline comment\n"
        "\n"
        "step.c = 0.5\n";
    ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.get("problem.kind") == "grad_quadratic");
    CHECK(cfg.get_int("run.iterations") == 250);
    CHECK(cfg.get_double("step.c") == 0.5);

    ExperimentConfig again = parse_config_text(serialize_config(cfg));
    CHECK(again.values == cfg.values);
}

TEST_CASE("config: malformed input is rejected") {
    CHECK_THROWS_AS(parse_config_text("bogus.key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("step.c = 0.5\nstep.c = 0.6\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("step.c 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("step.c =\n"), ConfigError);
    ExperimentConfig cfg = parse_config_text("step.c = abc\nrun.seed = 1.5\n");
    CHECK_THROWS_AS(cfg.get_double("step.c"), ConfigError);
    CHECK_THROWS_AS(cfg.get_int("run.seed"), ConfigError);
    CHECK_THROWS_AS(cfg.get("run.iterations"), ConfigError);
}

TEST_CASE("build_operator: a missing matrix file names the offending key") {
    ExperimentConfig cfg = parse_config_text(
        "problem.kind = grad_quadratic\n"
        "problem.matrix_file = th_definitely_missing.txt\n"
        "problem.b_file = th_b0.txt\n"
        "problem.L = 1\n");
    bool caught = false;
    try {
        build_operator(cfg);
    } catch (const ConfigError& e) {
        caught = true;
        CHECK(std::string(e.what()).find("problem.matrix_file") != std::string::npos);
    }
    CHECK(caught);
}

TEST_CASE("build_experiment: defaults and validation") {
    Fixture fx;
    ExperimentConfig cfg = parse_config_text(
        "problem.kind = grad_quadratic\n"
        "problem.matrix_file = th_A.txt\n"
        "problem.b_file = th_b0.txt\n"
        "problem.L = 1\n");
    BuiltExperiment built = build_experiment(cfg);
    CHECK(built.run.iterations == 1000);
    CHECK(built.run.seed == 1);
    CHECK(built.run.mode == RunMode::Simulated);
    CHECK(built.run.metrics_every == 1);
    CHECK(built.run.delays.kind() == DelayKind::Zero);
    CHECK(built.trace_path.empty());

    auto with = [&](const std::string& extra) {
        return build_experiment(parse_config_text(
            "problem.kind = grad_quadratic\n"
            "problem.matrix_file = th_A.txt\n"
            "problem.b_file = th_b0.txt\n"
            "problem.L = 1\n" +
            extra));
    };
    CHECK_THROWS_AS(with("run.mode = turbo\n"), ConfigError);
    CHECK_THROWS_AS(with("run.iterations = 0\n"), ConfigError);
    CHECK_THROWS_AS(with("step.kind = magic\n"), ConfigError);
    CHECK_THROWS_AS(with("delay.kind = psychic\n"), ConfigError);
    CHECK_THROWS_AS(with("problem.kind = unknown_kind\n"), ConfigError);
    // Stochastic closed forms need a stochastic delay law.
    Fixture fx2;
    write_file("th_sched.txt", "1 1\n");
    CHECK_THROWS_AS(with("delay.kind = schedule\n"
                         "delay.schedule_file = th_sched.txt\n"
                         "step.kind = stochastic_large\n"),
                    ConfigError);
    std::remove("th_sched.txt");
}

TEST_CASE("emit_trace: exact header, zero delays, row count, summary") {
    const Trace t = make_zero_delay_trace(10, 3, 7);
    std::ostringstream out;
    emit_trace(t, out);
    const std::string text = out.str();

    std::istringstream lines(text);
    std::string line;
    std::vector<std::string> all;
    while (std::getline(lines, line)) all.push_back(line);

    REQUIRE(all.size() == 5);  // header + floor(10/3) rows + summary
    CHECK(all[0] == "k,i_k,j_k,eta_k,fpr_norm,dist_to_sol,xi");
    CHECK(all[1].substr(0, 2) == "3,");
    CHECK(all[2].substr(0, 2) == "6,");
    CHECK(all[3].substr(0, 2) == "9,");
    CHECK(all[4].substr(0, 9) == "#summary,");
    // Zero-delay run: j_k column is 0, dist/xi columns empty.
    for (int i = 1; i <= 3; ++i) {
        std::istringstream row(all[static_cast<std::size_t>(i)]);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() >= 5);
        CHECK(fields[2] == "0");
    }
}

TEST_CASE("identical seeds give byte-identical traces up to the wall-time field") {
    const Trace a = make_zero_delay_trace(500, 50, 99);
    const Trace b = make_zero_delay_trace(500, 50, 99);
    std::ostringstream sa, sb;
    emit_trace(a, sa);
    emit_trace(b, sb);
    auto strip_wall = [](std::string s) {
        // The wall time is the second field of the #summary row; blank it.
        const std::size_t sum = s.rfind("#summary,");
        const std::size_t c1 = s.find(',', sum + 9);
        const std::size_t c2 = s.find(',', c1 + 1);
        return s.substr(0, c1) + s.substr(c2);
    };
    CHECK(strip_wall(sa.str()) == strip_wall(sb.str()));
}

TEST_CASE("step-size table rows: bounded and geometric hold, uniform is flagged") {
    const auto rows = table2_rows(100, {1, 2, 4, 8}, {0.25, 0.5, 0.9});
    for (const Table2Row& row : rows) {
        CHECK(row.computed > 0.0);
        CHECK(row.computed <= 1.0);
        if (row.distribution == "uniform")
            CHECK_FALSE(row.ok);  // documented: printed bound overestimates h
        else
            CHECK(row.ok);
    }
    const std::string report = table2_report(100);
    CHECK(report.find("OK") != std::string::npos);
    CHECK(report.find("BELOW") != std::string::npos);
}

TEST_CASE("cli: successful run writes the trace and returns 0") {
    Fixture fx;
    write_file("th_run.cfg",
               "problem.kind = grad_quadratic\n"
               "problem.matrix_file = th_A.txt\n"
               "problem.b_file = th_b1.txt\n"
               "problem.L = 1\n"
               "delay.kind = geometric\n"
               "delay.r = 0.5\n"
               "run.iterations = 2000\n"
               "run.metrics_every = 200\n"
               "out.trace_path = th_trace.csv\n");
    std::string err;
    const int code = run_cli({"--config", "th_run.cfg", "--seed", "3"}, nullptr, &err);
    CHECK(code == 0);
    const std::string trace = read_file("th_trace.csv");
    CHECK(trace.substr(0, 39) == "k,i_k,j_k,eta_k,fpr_norm,dist_to_sol,xi");
    CHECK(trace.find("#summary,") != std::string::npos);
    std::remove("th_run.cfg");
    std::remove("th_trace.csv");
}

TEST_CASE("cli: config errors return 2") {
    CHECK(run_cli({"--config", "th_no_such.cfg"}) == 2);
    CHECK(run_cli({}) == 2);  // --config required without --table2

    write_file("th_bad.cfg", "mystery.key = 1\n");
    CHECK(run_cli({"--config", "th_bad.cfg"}) == 2);
    std::remove("th_bad.cfg");

    CHECK(run_cli({"--mode", "warp"}) == 2);  // CLI-level validation
}

TEST_CASE("cli: descent violation returns 3") {
    Fixture fx;
    // Heavy geometric tail (r = 0.9) makes the theorem's h tiny, while the
    // adaptive policy keeps eta around 0.34 at small delays: the checker must
    // flag the very first steps.
    write_file("th_viol.cfg",
               "problem.kind = grad_quadratic\n"
               "problem.matrix_file = th_A.txt\n"
               "problem.b_file = th_b1.txt\n"
               "problem.L = 1\n"
               "delay.kind = geometric\n"
               "delay.r = 0.9\n"
               "step.kind = deterministic_adaptive\n"
               "step.c = 0.9\n"
               "step.truncation = 2000\n"
               "run.iterations = 50\n"
               "out.trace_path = th_viol.csv\n");
    std::string err;
    const int code = run_cli({"--config", "th_viol.cfg", "--check-descent"}, nullptr,
                             &err);
    CHECK(code == 3);
    std::remove("th_viol.cfg");
    std::remove("th_viol.csv");
}

TEST_CASE("cli: divergence returns 4") {
    Fixture fx;
    write_file("th_div.cfg",
               "problem.kind = grad_quadratic\n"
               "problem.matrix_file = th_A_indef.txt\n"
               "problem.b_file = th_b1.txt\n"
               "problem.L = 1\n"
               "run.iterations = 2000\n"
               "run.metrics_every = 100\n"
               "out.trace_path = th_div.csv\n");
    const int code = run_cli({"--config", "th_div.cfg"});
    CHECK(code == 4);
    std::remove("th_div.cfg");
    std::remove("th_div.csv");
}

TEST_CASE("cli: --table2 prints the report and returns 0") {
    std::string out;
    const int code = run_cli({"--table2", "--m", "144"}, &out);
    CHECK(code == 0);
    CHECK(out.find("step-size table (m = 144)") != std::string::npos);
    CHECK(out.find("bounded") != std::string::npos);
    CHECK(out.find("geometric") != std::string::npos);
}

TEST_CASE("cli: --check-descent accepts a matched stochastic policy") {
    Fixture fx;
    write_file("th_ok.cfg",
               "problem.kind = grad_quadratic\n"
               "problem.matrix_file = th_A.txt\n"
               "problem.b_file = th_b1.txt\n"
               "problem.L = 1\n"
               "delay.kind = geometric\n"
               "delay.r = 0.5\n"
               "step.kind = stochastic_large\n"
               "step.c = 0.9\n"
               "run.iterations = 500\n"
               "run.metrics_every = 100\n"
               "out.trace_path = th_ok.csv\n");
    const int code = run_cli({"--config", "th_ok.cfg", "--check-descent"});
    CHECK(code == 0);
    // With the checker on, the xi column is populated.
    const std::string trace = read_file("th_ok.csv");
    std::istringstream lines(trace);
    std::string line;
    std::getline(lines, line);  // header
    std::getline(lines, line);  // first row
    CHECK(line.back() != ',');
    std::remove("th_ok.cfg");
    std::remove("th_ok.csv");
}
