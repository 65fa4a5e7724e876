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

#include "criteria.hpp"

#include "pilotseq/config.hpp"
#include "pilotseq/outputs.hpp"
#include "pilotseq/simulation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace
{
    using namespace pilotseq;

    // Exit codes
    constexpr int exit_usage = 2;
    constexpr int exit_runtime = 1;
    constexpr int exit_verify = 3;

    struct CommonArgs
    {
        std::string config_path;
        std::string preset_name;
        std::optional<std::uint64_t> seed;
        std::string out_dir;
        std::optional<arma::uword> threads;
    };

    void add_common(CLI::App *cmd, CommonArgs &args)
    {
        cmd->add_option("--config", args.config_path, "JSON configuration file (applied on top of the preset)");
        cmd->add_option("--preset", args.preset_name, "named preset: desk, table3, table3_ci, fig9");
        cmd->add_option("--seed", args.seed, "64-bit Monte Carlo seed");
        cmd->add_option("--out", args.out_dir, "output directory");
        cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
    }

    ExperimentConfig resolve(const CommonArgs &args)
    {
        ExperimentConfig cfg = args.preset_name.empty() ? ExperimentConfig{} : preset(args.preset_name);
        if (!args.config_path.empty())
            cfg = load_config(args.config_path, cfg);
        if (args.seed)
            cfg.seed = *args.seed;
        if (!args.out_dir.empty())
            cfg.output_dir = args.out_dir;
        if (args.threads)
            cfg.threads = *args.threads;
        cfg.validate();
        return cfg;
    }

    int fail(int code, const std::string &kind, const std::string &message)
    {
        const nlohmann::json err = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
        std::cerr << err.dump() << '\n';
        return code;
    }

    std::string join(const arma::uvec &g)
    {
        std::string s;
        for (arma::uword i = 0; i < g.n_elem; ++i)
            s += (i ? "," : "") + std::to_string(g(i));
        return s;
    }

    void print_designs(const SimulationResult &res)
    {
        for (const auto &d : res.designs)
            std::printf("%-16s user %llu  n_d %3llu  objective %.6g  g=%s\n", d.scheme.c_str(),
                        (unsigned long long)d.user, (unsigned long long)d.assignment.n_d(), d.assignment.objective,
                        join(d.assignment.g).c_str());
    }

    std::string cell(double x, const char *f)
    {
        if (!std::isfinite(x))
            return "-";
        char buf[32];
        std::snprintf(buf, sizeof buf, f, x);
        return buf;
    }

    void print_summary(const SimulationResult &res)
    {
        const arma::uword window = std::min(res.trace.horizon(), 2 * res.config.frame.G);
        std::printf("%-16s %8s %10s %10s %9s %9s %9s\n", "scheme", "nmse", "snr[dB]", "snr_det", "se_sum", "se_det",
                    "se_lb");
        for (const auto &r : steady_state_summary(res.trace, window))
            std::printf("%-16s %8s %10s %10s %9s %9s %9s\n", r.scheme.c_str(), cell(r.nmse, "%.4f").c_str(),
                        cell(r.rx_snr_db, "%.2f").c_str(), cell(r.sinr_det_db, "%.2f").c_str(),
                        cell(r.se_mc, "%.3f").c_str(), cell(r.se_det, "%.3f").c_str(), cell(r.se_lb, "%.3f").c_str());
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"pilotseq: periodic training design and channel estimation simulation for FDD massive MIMO"};
    app.require_subcommand(1);

    CommonArgs design_args, sim_args;
    CLI::App *design = app.add_subcommand("design", "compute training assignments and sequence matrices");
    add_common(design, design_args);
    CLI::App *simulate = app.add_subcommand("simulate", "run the Monte Carlo simulation and write CSV outputs");
    add_common(simulate, sim_args);

    CLI::App *verify = app.add_subcommand("verify", "run the property and oracle checks");
    arma::uword verify_threads = 0;
    std::vector<std::string> criteria;
    verify->add_option("--threads", verify_threads, "worker threads (0 = all cores)");
    verify->add_option("criteria", criteria, "criterion ids (default: all)");
    verify->add_flag_callback(
        "--list",
        [] {
            for (const auto &id : acceptance::criterion_ids())
                std::cout << id << '\n';
            throw CLI::Success();
        },
        "list criterion ids");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::Success &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        return fail(exit_usage, "usage", e.what());
    }

    try
    {
        if (*design)
        {
            const ExperimentConfig cfg = resolve(design_args);
            const SimulationResult res = design_only(cfg);
            print_designs(res);
            for (const auto &p : emit_designs(res, cfg.output_dir))
                std::printf("wrote %s\n", p.c_str());
        }
        else if (*simulate)
        {
            const ExperimentConfig cfg = resolve(sim_args);
            const SimulationResult res = run_experiment(cfg);
            print_designs(res);
            print_summary(res);
            for (const auto &p : emit_outputs(res, cfg.output_dir))
                std::printf("wrote %s\n", p.c_str());
        }
        else if (*verify)
        {
            acceptance::Options opt;
            opt.threads = verify_threads;
            const int failed = acceptance::run_and_report(criteria, opt, std::cout);
            if (failed > 0)
                return fail(exit_verify, "verification_failed", std::to_string(failed) + " criteria failed");
        }
    }
    catch (const std::invalid_argument &e)
    {
        return fail(exit_usage, "invalid_argument", e.what());
    }
    catch (const std::exception &e)
    {
        return fail(exit_runtime, "runtime_error", e.what());
    }
    return 0;
}
