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

namespace pilotseq
{
    // Full-matrix Kalman estimator state. h_hat holds the filtered estimate after a
    // measurement update and the one-step prediction after a time update.
    struct KalmanState
    {
        arma::cx_vec h_hat;
        arma::cx_mat p_est;  // P_{l|l}
        arma::cx_mat p_pred; // P_{l|l-1}
        arma::uword block_index = 0;
    };

    // Kalman estimator expressed in the eigenbasis of R_h. Valid whenever every pilot
    // column is a scaled eigenvector sqrt(rho) u_i.
    struct DiagonalKalmanState
    {
        arma::cx_vec coeff_hat;
        arma::vec lambda_bar;  // eigenvalues of P_{l|l}
        arma::vec lambda_pred; // eigenvalues of P_{l|l-1}
        arma::uword block_index = 0;
    };

    KalmanState kalman_init(const ChannelStatistics &stats);

    // y = S^H h + w with w ~ CN(0, I).
    arma::cx_vec simulate_received(const arma::cx_vec &h, const arma::cx_mat &s, Rng &rng);

    // Gain K = P S (S^H P S + I)^{-1} computed through a Cholesky factor.
    // Throws std::runtime_error if the inner matrix is not numerically positive definite.
    arma::cx_mat kalman_gain(const arma::cx_mat &p_pred, const arma::cx_mat &s);

    KalmanState measurement_update(KalmanState state, const arma::cx_mat &s, const arma::cx_vec &y);

    KalmanState time_update(KalmanState state, const ChannelStatistics &stats);

    DiagonalKalmanState diagonal_init(const arma::vec &lambda);

    // projected_y(k) is the received pilot that carried sqrt(rho) u_{trained(k)}.
    // Throws std::out_of_range for an index >= r and std::invalid_argument for duplicates.
    DiagonalKalmanState diagonal_measurement_update(DiagonalKalmanState state, const arma::uvec &trained,
                                                    const arma::cx_vec &projected_y, double rho);

    DiagonalKalmanState diagonal_time_update(DiagonalKalmanState state, double a, const arma::vec &lambda);

    // Variance-only recursions (the error covariance does not depend on the data).
    arma::vec diagonal_posterior(const arma::vec &lambda_pred, const arma::uvec &trained, double rho);
    arma::vec diagonal_prediction(const arma::vec &lambda_bar, double a, const arma::vec &lambda);

} // namespace pilotseq
