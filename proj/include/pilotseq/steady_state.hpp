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

namespace pilotseq
{
    // Per-mode steady-state MSE envelopes for a periodic training assignment.
    // g(i) == 0 marks an untrained mode, whose envelopes are padded with lambda(i).
    struct SteadyStateProfile
    {
        arma::vec lambda;
        arma::vec lambda_lower; // MSE right after a pilot on the mode
        arma::vec lambda_upper; // MSE right before the next pilot
        arma::uvec g;
        arma::uword n_d = 0;
        double a = 1.0;
    };

    struct OracleResult
    {
        double value;
        unsigned long iterations;
    };

    // Steady-state post-measurement MSE of eigenmode lambda trained every g blocks.
    // a == 1 returns the analytic limit 0 (for rho > 0); rho == 0 returns lambda.
    double min_ss_mse(double lambda, double a, double rho, unsigned long g);

    // Steady-state MSE just before the next pilot: a^{2(g-1)} lower + (1 - a^{2(g-1)}) lambda.
    double max_ss_mse(double lambda_lower, double lambda, double a, unsigned long g);

    SteadyStateProfile profile(const arma::vec &lambda, double a, double rho, const arma::uvec &g);

    // Sum over trained modes of (1 - a^{2(g_i-1)}) (lambda_i - lower_i).
    double bound_gap(const SteadyStateProfile &p);

    // Iterates x <- (a^{2g} x + (1 - a^{2g}) lambda) / (rho (a^{2g} x + (1 - a^{2g}) lambda) + 1)
    // from x = lambda. Stops once the a-posteriori contraction bound on the distance to the
    // fixed point drops below tol. Throws std::runtime_error after max_iter iterations.
    OracleResult riccati_iterate_oracle(double lambda, double a, double rho, unsigned long g,
                                        double tol = 1e-12, unsigned long max_iter = 1000000);

} // namespace pilotseq
