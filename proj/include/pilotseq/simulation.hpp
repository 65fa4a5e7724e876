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
#include "pilotseq/config.hpp"
#include "pilotseq/sequence_design.hpp"
#include "pilotseq/steady_state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pilotseq
{
    // Channel statistics of one user plus the pieces the schemes need.
    struct UserChannel
    {
        double theta_h = 0.0;
        double gain = 1.0;            // path loss gamma
        ChannelStatistics stats;
        double trace_r = 0.0;         // tr(R_h), including discarded eigenvalues
        double discarded = 0.0;       // tr(R_h) minus the retained eigenvalues
        arma::cx_mat axis_h, axis_v;  // UPA axis covariances (empty for a ULA)
    };

    UserChannel build_user_channel(const ExperimentConfig &cfg, double theta_h);

    // Horizontal angles of all users: explicit angles, or evenly inside the sector.
    std::vector<double> user_angles(const ExperimentConfig &cfg);

    // Fixed training sets of the baselines, drawn once and cycled round-robin.
    class BaselineTraining
    {
    public:
        BaselineTraining(const ChannelStatistics &stats, const FrameParams &frame, std::uint64_t seed);

        // N_t x M_p training matrix with S^H S = rho I. Throws std::invalid_argument for unknown schemes.
        arma::cx_mat operator()(const std::string &scheme, arma::uword block) const;

        // Number of blocks after which the scheme repeats.
        arma::uword period(const std::string &scheme) const;

        // Eigenmodes (0-based) trained in the given block by mp_fixed / nd_fixed.
        arma::uvec trained_modes(const std::string &scheme, arma::uword block) const;

    private:
        const ChannelStatistics *stats_;
        FrameParams frame_;
        arma::cx_mat orthogonal_;
        arma::cx_mat random_;
    };

    enum class SchemeKind
    {
        eigen_modes, // pilots are eigenvectors of R_h; diagonal filter
        general,     // arbitrary pilots; full filter in the eigen-coordinates
        perfect      // genie channel knowledge
    };

    struct TrainingScheme
    {
        std::string name;
        SchemeKind kind = SchemeKind::general;
        bool designed = false;                 // produced by a designer
        std::vector<arma::uvec> modes;         // eigen_modes: trained modes per block of the cycle
        std::vector<arma::cx_mat> pilots;      // general: N_t x M_p training matrix per block of the cycle
        IntervalAssignment assignment;         // designed schemes only
        SequenceMatrix sequence;               // designed schemes only
        arma::uvec basis_columns;              // DFT column indices for hybrid designs

        arma::uword period() const;
    };

    // Schemes in cfg.scheme_names() order for one user at training power rho.
    std::vector<TrainingScheme> build_schemes(const ExperimentConfig &cfg, const UserChannel &user, double rho,
                                              std::uint64_t seed);

    // Per-block quantities, horizon_blocks x schemes. Block 0 is the prior before any training.
    // Entries never evaluated hold NaN.
    struct TraceTable
    {
        std::vector<std::string> schemes;
        arma::mat nmse;         // mean over users of tr(P)/tr(R)
        arma::mat rx_snr;       // Monte Carlo mean post-beamforming SINR (linear), averaged over users
        arma::mat bf_gain;      // Monte Carlo mean of rho |h^H h_hat|^2 / ||h_hat||^2 (linear), averaged over users
        arma::mat se_mc;        // Monte Carlo mean sum spectral efficiency
        arma::mat se_det;       // deterministic-equivalent sum spectral efficiency
        arma::mat sinr_det;     // deterministic-equivalent SINR (linear), averaged over users
        arma::mat se_lb;        // steady-state lower bound (designed eigen schemes only)

        arma::uword horizon() const { return nmse.n_rows; }
    };

    struct SweepRow
    {
        double snr_db;
        std::string scheme;
        double se_sum_mc;
        double se_det;
        double se_lb; // NaN when not applicable
    };

    struct DesignRecord
    {
        std::string scheme;
        arma::uword user;
        double theta_h;
        IntervalAssignment assignment;
        SequenceMatrix sequence;
        arma::uvec basis_columns;
    };

    struct SimulationResult
    {
        ExperimentConfig config;
        std::vector<UserChannel> users;
        std::vector<DesignRecord> designs;
        TraceTable trace;
        std::vector<SweepRow> sweep;
    };

    // Designs only; no Monte Carlo.
    SimulationResult design_only(const ExperimentConfig &cfg);

    SimulationResult run_single_user(const ExperimentConfig &cfg);
    SimulationResult run_multiuser(const ExperimentConfig &cfg);
    SimulationResult run_experiment(const ExperimentConfig &cfg);

    struct SteadyStateRow
    {
        std::string scheme;
        double nmse;
        double rx_snr_db;
        double bf_gain_db;
        double sinr_det_db;
        double se_mc;
        double se_det;
        double se_lb;
    };

    // Averages over the last `window` blocks (2G by default).
    std::vector<SteadyStateRow> steady_state_summary(const TraceTable &trace, arma::uword window);

} // namespace pilotseq
