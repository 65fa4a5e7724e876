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
#include "pilotseq/steady_state.hpp"

#include <vector>

namespace pilotseq
{
    // Downlink scene for matched-filter precoding. Cross-subspace products
    // |U_u^H U_u'|^2 are computed once on construction.
    class MultiuserScene
    {
    public:
        MultiuserScene(std::vector<ChannelStatistics> users, double rho, arma::uword M, arma::uword M_p);

        arma::uword n_users() const { return users_.size(); }
        const ChannelStatistics &user(arma::uword u) const { return users_.at(u); }
        double rho() const { return rho_; }
        arma::uword M() const { return M_; }
        arma::uword M_p() const { return M_p_; }

        // U_u^H U_v (r_u x r_v) and its elementwise squared magnitude.
        const arma::cx_mat &cross(arma::uword u, arma::uword v) const { return cross_.at(u).at(v); }
        const arma::mat &overlap(arma::uword u, arma::uword v) const { return overlap_.at(u).at(v); }

    private:
        std::vector<ChannelStatistics> users_;
        double rho_;
        arma::uword M_, M_p_;
        std::vector<std::vector<arma::cx_mat>> cross_;
        std::vector<std::vector<arma::mat>> overlap_;
    };

    // v_u = h_hat / (||h_hat|| sqrt(U)). Throws std::invalid_argument for a zero estimate.
    arma::cx_vec matched_filter_precoder(const arma::cx_vec &h_hat, arma::uword n_users);

    // Realized SINR of user u with alpha_u^2 = 1 / (||h_hat_u||^2 U).
    double instantaneous_sinr(const std::vector<arma::cx_vec> &h, const std::vector<arma::cx_vec> &h_hat,
                              arma::uword u, double rho);

    struct DeterministicTerms
    {
        double a;        // (tr(Lambda - Lambda_bar))^2
        double b;        // tr(Lambda_bar (Lambda - Lambda_bar))
        double c;        // interference from the other users' estimates
        double alpha_sq; // 1 / (U tr(Lambda - Lambda_bar))
        double sinr;
    };

    // Deterministic equivalent for error covariances diagonal in each user's eigenbasis.
    // lambda_bar[u] holds the eigenvalues of P_{u,l|l}. Throws if tr(Lambda_u - Lambda_bar_u) == 0.
    DeterministicTerms deterministic_terms(const MultiuserScene &scene, const std::vector<arma::vec> &lambda_bar,
                                           arma::uword u);
    double deterministic_sinr(const MultiuserScene &scene, const std::vector<arma::vec> &lambda_bar, arma::uword u);

    // Same quantities for general error covariances, p_est[u] expressed in the eigenbasis of user u
    // (r_u x r_u). Used when pilots are not eigenvectors of R_h.
    DeterministicTerms deterministic_terms(const MultiuserScene &scene, const std::vector<arma::cx_mat> &p_est,
                                           arma::uword u);

    // (1 - U M_p / M) log2(1 + sinr).
    double spectral_efficiency(double sinr, arma::uword n_users, arma::uword M_p, arma::uword M);

    // Closed-form lower bound on the steady-state deterministic SINR built from the
    // per-user envelopes. Throws when user u has no trained mode.
    double steady_state_sinr_lower_bound(const MultiuserScene &scene, const std::vector<SteadyStateProfile> &profiles,
                                         arma::uword u);

} // namespace pilotseq
