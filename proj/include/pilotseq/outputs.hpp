// SPDX-License-Identifier: Apache-2.0
//
// pilotseq - training sequence design and link simulation for FDD massive MIMO
// Copyright (C) 2026 The pilotseq authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "pilotseq/simulation.hpp"

#include <string>
#include <vector>

namespace pilotseq
{
    // "%.10g", or an empty field for NaN / infinities.
    std::string format_number(double x);

    // block,scheme,nmse,rx_snr_db,se_sum,se_det,se_lb; one row per (block, scheme), block-major.
    std::string trace_csv(const TraceTable &trace);
    std::string sweep_csv(const std::vector<SweepRow> &rows);
    std::string summary_csv(const std::vector<SteadyStateRow> &rows);

    // File name of a design: design_<scheme>.csv, with _u<k> appended for k > 0.
    std::string design_file_name(const DesignRecord &d);

    std::string plot_script();

    // Writes trace.csv, design.csv (first design, user 0), one design_<scheme>.csv per design,
    // summary.csv, sweep.csv (multiuser), config.resolved.json and plot_results.py into dir.
    // Returns the written paths. Throws std::runtime_error naming the path on I/O failure.
    std::vector<std::string> emit_outputs(const SimulationResult &res, const std::string &dir);

    // Design-only variant: design files and config.resolved.json.
    std::vector<std::string> emit_designs(const SimulationResult &res, const std::string &dir);

} // namespace pilotseq
