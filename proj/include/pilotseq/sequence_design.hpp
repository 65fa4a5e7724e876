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

#include <armadillo>
#include <string>
#include <vector>

namespace pilotseq
{
    struct FrameParams
    {
        arma::uword G = 32;   // frame length in blocks
        arma::uword M_p = 2;  // pilot symbols per block
        arma::uword M = 5;    // block length in symbols
        arma::uword N_d = 64; // cap on distinct pilot directions (RF chains)
        double rho = 10.0;    // per-symbol training power

        void validate() const; // throws std::invalid_argument
    };

    // Ascending divisors of G.
    std::vector<arma::uword> divisor_set(arma::uword G);
    bool is_prime_power(arma::uword n);

    // Training intervals of modes 1..n_d (mode i is retrained every g(i-1) blocks).
    struct IntervalAssignment
    {
        arma::uvec g;
        double objective = 0.0; // sum of the maximum steady-state MSE over all r modes

        arma::uword n_d() const { return g.n_elem; }
    };

    // Sum over i < r of the maximum steady-state MSE, untrained modes contributing lambda_i.
    double assignment_objective(const arma::vec &lambda, double a, double rho, const arma::uvec &g);

    // Searches all admissible n_d and all nondecreasing interval vectors. Ties go to the
    // smaller n_d, then to the lexicographically smaller g.
    IntervalAssignment exhaustive_search(const arma::vec &lambda, double a, double rho, const FrameParams &frame);

    struct MinMaxTraceStep
    {
        arma::uword n_blk;        // unallocated pilot slots at the start of the iteration
        arma::uword candidates;   // size of the candidate set at the start of the iteration
        arma::uword chosen;       // selected mode (0-based)
        bool reallocated;         // false when the mode was removed from the candidate set
    };

    // Greedy min-max design. The candidate set is {1..min(N_d, r)}; argmax ties go to the
    // lowest index and a mode already at interval 1 is removed from the candidate set.
    IntervalAssignment min_max_design(const arma::vec &lambda, double a, double rho, const FrameParams &frame,
                                      std::vector<MinMaxTraceStep> *trace = nullptr);

    // Empty result means the assignment is valid.
    std::vector<std::string> validate_assignment(const IntervalAssignment &asn, const FrameParams &frame,
                                                 arma::uword rank);

    // G x M_p matrix of 1-based mode indices; row l lists the modes trained in block l.
    struct SequenceMatrix
    {
        arma::umat c;
        arma::uword n_d = 0;

        arma::uword G() const { return c.n_rows; }
        arma::uword M_p() const { return c.n_cols; }

        // 0-based mode indices trained in block l (wrapping modulo G).
        arma::uvec trained_modes(arma::uword block) const;
    };

    // Empty result means every structural invariant holds for the given intervals.
    std::vector<std::string> check_sequence_matrix(const SequenceMatrix &seq, const arma::uvec &g);

    // Row-wise periodic allocation. Throws std::logic_error if a slot would be assigned twice
    // or the indices run out before every entry is determined.
    SequenceMatrix construct_sequence_matrix(const IntervalAssignment &asn, const FrameParams &frame);

    // S_l = sqrt(rho) [basis(:, C(l,1)-1), ..., basis(:, C(l,M_p)-1)] for l = 0..G-1.
    std::vector<arma::cx_mat> expand_training_signals(const SequenceMatrix &seq, const arma::cx_mat &basis,
                                                      double rho);

    // Header "# G=<G> Mp=<M_p> nd=<n_d> g=<list>" followed by G comma-separated rows.
    std::string sequence_to_csv(const SequenceMatrix &seq, const arma::uvec &g);

    struct ParsedSequence
    {
        SequenceMatrix seq;
        arma::uvec g;
    };
    ParsedSequence sequence_from_csv(const std::string &text);

} // namespace pilotseq
