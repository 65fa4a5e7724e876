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


#include "pilotseq/multiuser.hpp"

#include <cmath>
#include <stdexcept>

namespace pilotseq
{
    MultiuserScene::MultiuserScene(std::vector<ChannelStatistics> users, double rho, arma::uword M, arma::uword M_p)
        : users_(std::move(users)), rho_(rho), M_(M), M_p_(M_p)
    {
        const arma::uword n = users_.size();
        if (n == 0)
            throw std::invalid_argument("MultiuserScene: at least one user required");
        if (n * M_p >= M)
            throw std::invalid_argument("MultiuserScene: training of all users must fit in the block (U M_p < M)");
        if (!(rho > 0.0))
            throw std::invalid_argument("MultiuserScene: rho must be positive");
        for (const auto &s : users_)
            if (s.n_t() != users_.front().n_t())
                throw std::invalid_argument("MultiuserScene: users must share the array size");

        cross_.assign(n, std::vector<arma::cx_mat>(n));
        overlap_.assign(n, std::vector<arma::mat>(n));
        for (arma::uword u = 0; u < n; ++u)
            for (arma::uword v = 0; v < n; ++v)
                if (u != v)
                {
                    cross_[u][v] = users_[u].u.t() * users_[v].u;
                    overlap_[u][v] = arma::square(arma::abs(cross_[u][v]));
                }
    }

    arma::cx_vec matched_filter_precoder(const arma::cx_vec &h_hat, arma::uword n_users)
    {
        const double nrm = arma::norm(h_hat);
        if (!(nrm > 0.0))
            throw std::invalid_argument("matched_filter_precoder: zero channel estimate");
        return h_hat / (nrm * std::sqrt(double(n_users)));
    }

    double instantaneous_sinr(const std::vector<arma::cx_vec> &h, const std::vector<arma::cx_vec> &h_hat,
                              arma::uword u, double rho)
    {
        const arma::uword n = h.size();
        if (h_hat.size() != n || u >= n)
            throw std::invalid_argument("instantaneous_sinr: inconsistent user count");

        std::vector<double> alpha_sq(n);
        for (arma::uword v = 0; v < n; ++v)
        {
            const double e = std::real(arma::cdot(h_hat[v], h_hat[v]));
            if (!(e > 0.0))
                throw std::invalid_argument("instantaneous_sinr: zero channel estimate");
            alpha_sq[v] = 1.0 / (e * double(n));
        }

        const double signal = std::norm(arma::cdot(h_hat[u], h_hat[u]));
        double noise = 1.0 / (alpha_sq[u] * rho) + std::norm(arma::cdot(arma::cx_vec(h[u] - h_hat[u]), h_hat[u]));
        for (arma::uword v = 0; v < n; ++v)
            if (v != u)
                noise += alpha_sq[v] / alpha_sq[u] * std::norm(arma::cdot(h[u], h_hat[v]));
        return signal / noise;
    }

    DeterministicTerms deterministic_terms(const MultiuserScene &scene, const std::vector<arma::vec> &lambda_bar,
                                           arma::uword u)
    {
        const arma::uword n = scene.n_users();
        if (lambda_bar.size() != n || u >= n)
            throw std::invalid_argument("deterministic_terms: inconsistent user count");

        std::vector<double> t(n);
        for (arma::uword v = 0; v < n; ++v)
        {
            const arma::vec &lam = scene.user(v).lambda;
            if (lambda_bar[v].n_elem != lam.n_elem)
                throw std::invalid_argument("deterministic_terms: eigenvalue profile length mismatch");
            t[v] = arma::accu(lam - lambda_bar[v]);
            if (!(t[v] > 0.0))
                throw std::invalid_argument("deterministic_terms: estimate carries no energy");
        }

        const arma::vec &lam_u = scene.user(u).lambda;
        DeterministicTerms out{};
        out.a = t[u] * t[u];
        out.b = arma::accu(lambda_bar[u] % (lam_u - lambda_bar[u]));
        out.alpha_sq = 1.0 / (double(n) * t[u]);
        out.c = 0.0;
        for (arma::uword v = 0; v < n; ++v)
        {
            if (v == u)
                continue;
            const arma::vec diff = scene.user(v).lambda - lambda_bar[v];
            const double cross = arma::as_scalar(lam_u.t() * scene.overlap(u, v) * diff);
            out.c += t[u] / t[v] * cross; // alpha_v^2 / alpha_u^2
        }
        out.sinr = out.a / (1.0 / (out.alpha_sq * scene.rho()) + out.b + out.c);
        return out;
    }

    DeterministicTerms deterministic_terms(const MultiuserScene &scene, const std::vector<arma::cx_mat> &p_est,
                                           arma::uword u)
    {
        const arma::uword n = scene.n_users();
        if (p_est.size() != n || u >= n)
            throw std::invalid_argument("deterministic_terms: inconsistent user count");

        std::vector<double> t(n);
        for (arma::uword v = 0; v < n; ++v)
        {
            const arma::uword r = scene.user(v).rank();
            if (p_est[v].n_rows != r || p_est[v].n_cols != r)
                throw std::invalid_argument("deterministic_terms: error covariance size mismatch");
            t[v] = arma::accu(scene.user(v).lambda) - std::real(arma::trace(p_est[v]));
            if (!(t[v] > 0.0))
                throw std::invalid_argument("deterministic_terms: estimate carries no energy");
        }

        const arma::vec &lam_u = scene.user(u).lambda;
        const arma::cx_mat &p = p_est[u];
        DeterministicTerms out{};
        out.a = t[u] * t[u];
        // tr(P (Lambda - P)) for Hermitian P
        out.b = arma::accu(arma::real(p.diag()) % lam_u) - std::pow(arma::norm(p, "fro"), 2);
        out.alpha_sq = 1.0 / (double(n) * t[u]);
        out.c = 0.0;
        for (arma::uword v = 0; v < n; ++v)
        {
            if (v == u)
                continue;
            arma::cx_mat d = -p_est[v];
            d.diag() += arma::conv_to<arma::cx_vec>::from(scene.user(v).lambda);
            const arma::cx_mat &w = scene.cross(u, v);
            const arma::vec inner = arma::real(arma::sum(arma::conj(w) % (w * d).eval(), 1)); // diag(W D W^H)
            out.c += t[u] / t[v] * arma::dot(lam_u, inner);
        }
        out.sinr = out.a / (1.0 / (out.alpha_sq * scene.rho()) + out.b + out.c);
        return out;
    }

    double deterministic_sinr(const MultiuserScene &scene, const std::vector<arma::vec> &lambda_bar, arma::uword u)
    {
        return deterministic_terms(scene, lambda_bar, u).sinr;
    }

    double spectral_efficiency(double sinr, arma::uword n_users, arma::uword M_p, arma::uword M)
    {
        if (n_users * M_p >= M)
            throw std::invalid_argument("spectral_efficiency: requires U M_p < M");
        return (1.0 - double(n_users * M_p) / double(M)) * std::log2(1.0 + sinr);
    }

    double steady_state_sinr_lower_bound(const MultiuserScene &scene, const std::vector<SteadyStateProfile> &profiles,
                                         arma::uword u)
    {
        const arma::uword n = scene.n_users();
        if (profiles.size() != n || u >= n)
            throw std::invalid_argument("steady_state_sinr_lower_bound: inconsistent user count");

        std::vector<double> l(n);
        for (arma::uword v = 0; v < n; ++v)
        {
            if (profiles[v].n_d == 0)
                throw std::invalid_argument("steady_state_sinr_lower_bound: user without trained modes");
            if (profiles[v].lambda.n_elem != scene.user(v).lambda.n_elem)
                throw std::invalid_argument("steady_state_sinr_lower_bound: profile length mismatch");
            l[v] = arma::accu(profiles[v].lambda - profiles[v].lambda_upper);
        }

        const SteadyStateProfile &p = profiles[u];
        const double alpha_sq = 1.0 / (double(n) * l[u]);
        const double self = arma::accu(p.lambda_upper % (p.lambda - p.lambda_lower));
        double cross = 0.0;
        for (arma::uword v = 0; v < n; ++v)
        {
            if (v == u)
                continue;
            const arma::vec diff = profiles[v].lambda - profiles[v].lambda_lower;
            cross += l[u] / l[v] * arma::as_scalar(p.lambda.t() * scene.overlap(u, v) * diff);
        }
        return l[u] * l[u] / (1.0 / (alpha_sq * scene.rho()) + self + cross);
    }

} // namespace pilotseq
