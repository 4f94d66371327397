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
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "arock/delays.hpp"
#include "arock/stepsize.hpp"

namespace arock {

// ============================================================================
// Step-size table report
//
// For each delay-distribution row, prints the literature's closed-form lower
// bound for h next to the h this library computes from the exact tail, and
// flags rows where the computed value falls below bound - 1e-12.
//
// Known caveat, kept visible on purpose: for the uniform distribution on
// {0..tau} the exact tail is P_l = 1 - l/(tau+1), and
// sum_{l=1}^{tau} P_l^{1/2} exceeds 2 tau/3 for every tau >= 1, so the
// printed "(1 + 4 tau/(3 sqrt(m)))^-1" slightly OVERestimates h; those rows
// report BELOW.  The bounded and geometric rows are true lower bounds.
// ============================================================================

struct Table2Row {
    std::string distribution;
    double parameter = 0.0;  // tau or r
    double bound = 0.0;
    double computed = 0.0;
    bool ok = false;
};

inline std::vector<Table2Row> table2_rows(std::size_t m,
                                          const std::vector<long long>& taus,
                                          const std::vector<double>& r_values,
                                          long long K = 1000) {
    std::vector<Table2Row> rows;
    const double sm = std::sqrt(static_cast<double>(m));
    for (long long tau : taus) {
        Table2Row row;
        row.distribution = "bounded";
        row.parameter = static_cast<double>(tau);
        row.bound = 1.0 / (1.0 + 2.0 * static_cast<double>(tau) / sm);
        row.computed = tau == 0
                           ? 1.0
                           : stochastic_h_large(
                                 DelayModel::bounded_arbitrary(1, tau).tail_probability(),
                                 m, std::max<long long>(K, tau + 1));
        row.ok = row.computed >= row.bound - 1e-12;
        rows.push_back(row);
    }
    for (long long tau : taus) {
        Table2Row row;
        row.distribution = "uniform";
        row.parameter = static_cast<double>(tau);
        row.bound = 1.0 / (1.0 + 4.0 * static_cast<double>(tau) / (3.0 * sm));
        row.computed = tau == 0
                           ? 1.0
                           : stochastic_h_large(
                                 DelayModel::uniform_on_range(1, tau).tail_probability(),
                                 m, std::max<long long>(K, tau + 1));
        row.ok = row.computed >= row.bound - 1e-12;
        rows.push_back(row);
    }
    for (double r : r_values) {
        Table2Row row;
        row.distribution = "geometric";
        row.parameter = r;
        const double C = 1.0 - r;  // exact geometric law; tail P_l = r^l
        const double sr = std::sqrt(r);
        row.bound = 1.0 / (1.0 + 2.0 * std::sqrt(C / static_cast<double>(m)) * sr /
                                     std::pow(1.0 - sr, 1.5));
        row.computed = stochastic_h_large(
            DelayModel::geometric_tail(1, C, r).tail_probability(), m, K);
        row.ok = row.computed >= row.bound - 1e-12;
        rows.push_back(row);
    }
    return rows;
}

inline std::string table2_report(std::size_t m,
                                 const std::vector<long long>& taus = {1, 2, 4, 8},
                                 const std::vector<double>& r_values = {0.25, 0.5,
                                                                        0.9},
                                 long long K = 1000) {
    std::ostringstream out;
    out << "step-size table (m = " << m << ")\n";
    out << "distribution  param      bound          computed h     status\n";
    char buf[160];
    for (const Table2Row& row : table2_rows(m, taus, r_values, K)) {
        std::snprintf(buf, sizeof(buf), "%-12s  %-8g  %.12f  %.12f  %s\n",
                      row.distribution.c_str(), row.parameter, row.bound,
                      row.computed, row.ok ? "OK" : "BELOW");
        out << buf;
    }
    return out.str();
}

}  // namespace arock
