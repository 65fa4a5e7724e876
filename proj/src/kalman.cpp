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

#include "pilotseq/kalman.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pilotseq
{
    namespace
    {
        void check_trained(const arma::uvec &trained, arma::uword r)
        {
            std::vector<bool> seen(r, false);
            for (const arma::uword i : trained)
            {
                if (i >= r)
                    throw std::out_of_range("diagonal Kalman: eigenmode index out of range");
                if (seen[i])
                    throw std::invalid_argument("diagonal Kalman: eigenmode trained twice in one block");
                seen[i] = true;
            }
        }
    } // namespace

    KalmanState kalman_init(const ChannelStatistics &stats)
    {
        KalmanState s;
        s.h_hat.zeros(stats.n_t());
        s.p_pred = stats.r_h;
        s.p_est = stats.r_h;
        s.block_index = 0;
        return s;
    }

    arma::cx_vec simulate_received(const arma::cx_vec &h, const arma::cx_mat &s, Rng &rng)
    {
        return s.t() * h + complex_normal(s.n_cols, rng);
    }

    arma::cx_mat kalman_gain(const arma::cx_mat &p_pred, const arma::cx_mat &s)
    {
        const arma::cx_mat ps = p_pred * s;
        arma::cx_mat inner = s.t() * ps;
        inner = 0.5 * (inner + inner.t());
        inner.diag() += 1.0;

        arma::cx_mat l;
        if (!arma::chol(l, inner, "lower"))
            throw std::runtime_error("kalman_gain: innovation covariance is not positive definite");

        // K^H = inner^{-1} (P S)^H
        const arma::cx_mat tmp = arma::solve(arma::trimatl(l), arma::cx_mat(ps.t()));
        return arma::solve(arma::trimatu(arma::cx_mat(l.t())), tmp).t();
    }

    KalmanState measurement_update(KalmanState state, const arma::cx_mat &s, const arma::cx_vec &y)
    {
        if (s.n_cols == 0)
        {
            state.p_est = state.p_pred;
            return state;
        }
        if (s.n_rows != state.h_hat.n_elem || y.n_elem != s.n_cols)
            throw std::invalid_argument("measurement_update: dimension mismatch");

        const arma::cx_mat k = kalman_gain(state.p_pred, s);
        state.h_hat = state.h_hat + k * (y - s.t() * state.h_hat);
        arma::cx_mat p = state.p_pred - k * (s.t() * state.p_pred);
        state.p_est = 0.5 * (p + p.t());
        return state;
    }

    KalmanState time_update(KalmanState state, const ChannelStatistics &stats)
    {
        const double a = stats.a;
        state.h_hat *= a;
        arma::cx_mat p = a * a * state.p_est + (1.0 - a * a) * stats.r_h;
        state.p_pred = 0.5 * (p + p.t());
        ++state.block_index;
        return state;
    }

    DiagonalKalmanState diagonal_init(const arma::vec &lambda)
    {
        DiagonalKalmanState s;
        s.coeff_hat.zeros(lambda.n_elem);
        s.lambda_bar = lambda;
        s.lambda_pred = lambda;
        s.block_index = 0;
        return s;
    }

    arma::vec diagonal_posterior(const arma::vec &lambda_pred, const arma::uvec &trained, double rho)
    {
        check_trained(trained, lambda_pred.n_elem);
        arma::vec out = lambda_pred;
        for (const arma::uword i : trained)
            out(i) = lambda_pred(i) / (1.0 + rho * lambda_pred(i));
        return out;
    }

    arma::vec diagonal_prediction(const arma::vec &lambda_bar, double a, const arma::vec &lambda)
    {
        return a * a * lambda_bar + (1.0 - a * a) * lambda;
    }

    DiagonalKalmanState diagonal_measurement_update(DiagonalKalmanState state, const arma::uvec &trained,
                                                    const arma::cx_vec &projected_y, double rho)
    {
        if (projected_y.n_elem != trained.n_elem)
            throw std::invalid_argument("diagonal_measurement_update: one observation per trained mode required");
        state.lambda_bar = diagonal_posterior(state.lambda_pred, trained, rho);

        const double sr = std::sqrt(rho);
        for (arma::uword k = 0; k < trained.n_elem; ++k)
        {
            const arma::uword i = trained(k);
            const double lp = state.lambda_pred(i);
            const double gain = lp * sr / (rho * lp + 1.0);
            state.coeff_hat(i) += gain * (projected_y(k) - sr * state.coeff_hat(i));
        }
        return state;
    }

    DiagonalKalmanState diagonal_time_update(DiagonalKalmanState state, double a, const arma::vec &lambda)
    {
        state.coeff_hat *= a;
        state.lambda_pred = diagonal_prediction(state.lambda_bar, a, lambda);
        ++state.block_index;
        return state;
    }

} // namespace pilotseq
