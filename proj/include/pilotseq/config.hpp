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

#include "pilotseq/channel_model.hpp"
#include "pilotseq/sequence_design.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pilotseq
{
    enum class ExperimentMode
    {
        single_user,
        multiuser
    };

    struct UserPlacement
    {
        arma::uword count = 1;
        double theta_min = -1.0471975511965976; // users sit evenly inside (theta_min, theta_max)
        double theta_max = 1.0471975511965976;
        std::vector<double> angles;             // explicit horizontal angles; overrides the sector when set
    };

    // All experiment parameters. JSON keys mirror the field names; see README for the layout.
    struct ExperimentConfig
    {
        std::string name = "desk";
        ExperimentMode mode = ExperimentMode::single_user;
        ArrayGeometry array = ArrayGeometry::ula(32);
        OneRingGeometry geometry;
        FrameParams frame;
        std::vector<std::string> designers = {"min_max", "exhaustive"}; // min_max | exhaustive
        std::vector<std::string> bases = {"eigen", "dft"};              // eigen | dft
        std::vector<std::string> baselines = {"orthogonal", "random", "mp_fixed", "nd_fixed", "perfect_csit"};
        UserPlacement users;
        std::vector<double> snr_db;      // multiuser sweep points, SNR = gamma rho; empty = trace only
        arma::uword mc_runs = 100;
        std::uint64_t seed = 1;
        arma::uword horizon_blocks = 512;
        arma::uword threads = 0;         // 0 = hardware concurrency
        double rank_tol = default_rank_tol;
        std::string output_dir = "out";

        // Throws std::invalid_argument naming the offending field.
        void validate() const;

        // Scheme labels in trace order, e.g. "min_max", "exhaustive_dft", "orthogonal".
        std::vector<std::string> scheme_names() const;
        arma::uword resolved_threads() const;
    };

    std::vector<std::string> preset_names();
    ExperimentConfig preset(const std::string &name); // throws std::invalid_argument for unknown names

    // Serialization. Parsing starts from `base` and overrides the keys present in the text;
    // unknown keys are rejected.
    std::string config_to_json(const ExperimentConfig &cfg);
    ExperimentConfig config_from_json(const std::string &text, const ExperimentConfig &base = ExperimentConfig{});
    ExperimentConfig load_config(const std::string &path, const ExperimentConfig &base = ExperimentConfig{});

} // namespace pilotseq
