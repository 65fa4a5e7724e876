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

#include "pilotseq/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pilotseq
{
    namespace
    {
        namespace fs = std::filesystem;

        std::string write_file(const fs::path &dir, const std::string &name, const std::string &text)
        {
            const fs::path p = dir / name;
            std::ofstream f(p, std::ios::binary | std::ios::trunc);
            if (!f)
                throw std::runtime_error("cannot open " + p.string() + " for writing");
            f << text;
            f.close();
            if (!f)
                throw std::runtime_error("write failed: " + p.string());
            return p.string();
        }

        void ensure_dir(const fs::path &dir)
        {
            std::error_code ec;
            fs::create_directories(dir, ec);
            if (ec || !fs::is_directory(dir))
                throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
        }

        double to_db(double x) { return x > 0.0 ? 10.0 * std::log10(x) : std::nan(""); }
    } // namespace

    std::string format_number(double x)
    {
        if (!std::isfinite(x))
            return "";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", x);
        return buf;
    }

    std::string trace_csv(const TraceTable &trace)
    {
        std::ostringstream os;
        os << "block,scheme,nmse,rx_snr_db,se_sum,se_det,se_lb\n";
        for (arma::uword b = 0; b < trace.horizon(); ++b)
            for (arma::uword s = 0; s < trace.schemes.size(); ++s)
                os << b << ',' << trace.schemes[s] << ',' << format_number(trace.nmse(b, s)) << ','
                   << format_number(to_db(trace.rx_snr(b, s))) << ',' << format_number(trace.se_mc(b, s)) << ','
                   << format_number(trace.se_det(b, s)) << ',' << format_number(trace.se_lb(b, s)) << '\n';
        return os.str();
    }

    std::string sweep_csv(const std::vector<SweepRow> &rows)
    {
        std::ostringstream os;
        os << "snr_db,scheme,se_sum_mc,se_det,se_lb\n";
        for (const auto &r : rows)
            os << format_number(r.snr_db) << ',' << r.scheme << ',' << format_number(r.se_sum_mc) << ','
               << format_number(r.se_det) << ',' << format_number(r.se_lb) << '\n';
        return os.str();
    }

    std::string summary_csv(const std::vector<SteadyStateRow> &rows)
    {
        std::ostringstream os;
        os << "scheme,nmse,rx_snr_db,rx_snr_det_db,se_sum,se_det,se_lb\n";
        for (const auto &r : rows)
            os << r.scheme << ',' << format_number(r.nmse) << ',' << format_number(r.rx_snr_db) << ','
               << format_number(r.sinr_det_db) << ',' << format_number(r.se_mc) << ',' << format_number(r.se_det)
               << ',' << format_number(r.se_lb) << '\n';
        return os.str();
    }

    std::string design_file_name(const DesignRecord &d)
    {
        std::string name = "design_" + d.scheme;
        if (d.user > 0)
            name += "_u" + std::to_string(d.user);
        return name + ".csv";
    }

    std::string plot_script()
    {
        return R"PY(#!/usr/bin/env python3
# Plots trace.csv (and sweep.csv when present) from a pilotseq output directory.
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def series(rows, key, x):
    out = defaultdict(lambda: ([], []))
    for r in rows:
        if r[key] == "":
            continue
        xs, ys = out[r["scheme"]]
        xs.append(float(r[x]))
        ys.append(float(r[key]))
    return out


def main():
    d = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent
    trace = read(d / "trace.csv")
    fig, ax = plt.subplots(1, 2, figsize=(11, 4))
    for name, (xs, ys) in series(trace, "nmse", "block").items():
        ax[0].plot(xs, ys, label=name)
    ax[0].set_xlabel("block")
    ax[0].set_ylabel("NMSE")
    ax[0].set_yscale("log")
    for name, (xs, ys) in series(trace, "rx_snr_db", "block").items():
        ax[1].plot(xs, ys, label=name)
    ax[1].set_xlabel("block")
    ax[1].set_ylabel("received SNR [dB]")
    ax[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(d / "trace.png", dpi=150)

    sweep_path = d / "sweep.csv"
    if sweep_path.exists():
        sweep = read(sweep_path)
        fig, ax = plt.subplots(figsize=(6, 4))
        for key, style in (("se_sum_mc", "-o"), ("se_det", "--"), ("se_lb", ":")):
            for name, (xs, ys) in series(sweep, key, "snr_db").items():
                ax.plot(xs, ys, style, label=f"{name} {key}")
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("sum spectral efficiency [bit/s/Hz]")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(d / "sweep.png", dpi=150)


if __name__ == "__main__":
    main()
)PY";
    }

    std::vector<std::string> emit_designs(const SimulationResult &res, const std::string &dir)
    {
        const fs::path d(dir);
        ensure_dir(d);
        std::vector<std::string> out;
        if (res.designs.empty())
            out.push_back(write_file(d, "design.csv", "# no designed scheme in this configuration\n"));
        else
        {
            const DesignRecord &first = res.designs.front();
            out.push_back(write_file(d, "design.csv", sequence_to_csv(first.sequence, first.assignment.g)));
        }
        for (const auto &rec : res.designs)
            out.push_back(write_file(d, design_file_name(rec), sequence_to_csv(rec.sequence, rec.assignment.g)));
        out.push_back(write_file(d, "config.resolved.json", config_to_json(res.config)));
        return out;
    }

    std::vector<std::string> emit_outputs(const SimulationResult &res, const std::string &dir)
    {
        if (res.trace.horizon() == 0 || res.trace.schemes.empty())
            throw std::invalid_argument("emit_outputs: empty trace");
        std::vector<std::string> out = emit_designs(res, dir);
        const fs::path d(dir);
        out.push_back(write_file(d, "trace.csv", trace_csv(res.trace)));
        const arma::uword window = std::min(res.trace.horizon(), 2 * res.config.frame.G);
        out.push_back(write_file(d, "summary.csv", summary_csv(steady_state_summary(res.trace, window))));
        if (!res.sweep.empty())
            out.push_back(write_file(d, "sweep.csv", sweep_csv(res.sweep)));
        out.push_back(write_file(d, "plot_results.py", plot_script()));
        return out;
    }

} // namespace pilotseq
