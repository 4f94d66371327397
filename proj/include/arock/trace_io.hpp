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

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "arock/engine.hpp"
#include "arock/errors.hpp"

namespace arock {

// ============================================================================
// Trace CSV
//
// Header (bit-exact):  k,i_k,j_k,eta_k,fpr_norm,dist_to_sol,xi
// One row per metrics-cadence step; dist_to_sol and xi are left empty when x*
// is unknown / the checker is off.  A final summary row is prefixed #summary.
// Doubles are printed with 17 significant digits so identical runs produce
// byte-identical files.
// ============================================================================

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void emit_trace(const Trace& trace, std::ostream& out) {
    out << "k,i_k,j_k,eta_k,fpr_norm,dist_to_sol,xi\n";
    for (const TraceRow& row : trace.rows) {
        out << row.k << ',' << row.i_k << ',' << row.j_k << ','
            << format_double(row.eta_k) << ',' << format_double(row.fpr_norm) << ',';
        if (row.dist_to_sol >= 0.0) out << format_double(row.dist_to_sol);
        out << ',';
        if (row.xi >= 0.0) out << format_double(row.xi);
        out << '\n';
    }
    out << "#summary," << format_double(trace.final_fpr) << ','
        << format_double(trace.wall_seconds) << ',' << trace.updates << '\n';
    if (!out) throw IoError("emit_trace: stream write failed");
}

inline void emit_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_trace: cannot open " + path);
    emit_trace(trace, out);
    out.flush();
    if (!out) throw IoError("emit_trace: write to " + path + " failed");
}

}  // namespace arock
