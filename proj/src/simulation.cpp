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

#include "pilotseq/simulation.hpp"

#include "pilotseq/kalman.hpp"
#include "pilotseq/multiuser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace pilotseq
{
    namespace
    {
        constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();
        constexpr arma::uword chunk_blocks = 128;

        Rng stream_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
        {
            std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(tag),
                              std::uint32_t(tag >> 32), std::uint32_t(index), std::uint32_t(index >> 32)};
            return Rng(seq);
        }

        bool is_baseline(const std::string &s)
        {
            return s == "orthogonal" || s == "random" || s == "mp_fixed" || s == "nd_fixed" || s == "perfect_csit";
        }

        IntervalAssignment run_designer(const std::string &designer, const arma::vec &lambda, double a,
                                        const FrameParams &frame)
        {
            if (designer == "min_max")
                return min_max_design(lambda, a, frame.rho, frame);
            if (designer == "exhaustive")
                return exhaustive_search(lambda, a, frame.rho, frame);
            throw std::invalid_argument("unknown designer: " + designer);
        }

        arma::uvec padded_intervals(const IntervalAssignment &asn, arma::uword r)
        {
            arma::uvec g(r, arma::fill::zeros);
            g.head(asn.g.n_elem) = asn.g;
            return g;
        }

        // A scheme in the eigen-coordinates of its user.
        struct Prepared
        {
            SchemeKind kind;
            arma::uword period;
            std::vector<arma::uvec> modes;
            std::vector<arma::cx_mat> reduced; // U^H S, r x M_p
        };

        Prepared prepare(const TrainingScheme &s, const UserChannel &user)
        {
            Prepared p{s.kind, s.period(), s.modes, {}};
            p.reduced.reserve(s.pilots.size());
            for (const auto &pilot : s.pilots)
                p.reduced.push_back(user.stats.u.t() * pilot);
            return p;
        }

        // Error covariance trajectory, identical for every Monte Carlo run.
        struct Trajectory
        {
            arma::vec lam_pred, lam_est;
            arma::cx_mat p_pred, p_est;
        };

        struct BlockGain
        {
            arma::uvec modes;
            arma::vec k;         // eigen_modes: gain of each trained mode
            arma::cx_mat s;      // general: reduced pilots
            arma::cx_mat kg;     // general: Kalman gain
        };

        struct RunState
        {
            Rng rng;
            std::vector<arma::cx_vec> c;                  // [user]
            std::vector<std::vector<arma::cx_vec>> c_hat; // [user][scheme]
        };

        struct EngineSpec
        {
            const std::vector<UserChannel> *users;
            std::vector<std::vector<Prepared>> schemes; // [user][scheme]
            const MultiuserScene *scene;
            double rho;
            FrameParams frame;
            arma::uword horizon;
            arma::uword record_from; // first block with Monte Carlo metrics
            arma::uword runs;
            std::uint64_t seed;
            std::uint64_t stream;
            arma::uword threads;
        };

        struct EngineOutput
        {
            arma::mat nmse, rx_snr, bf_gain, se_mc, se_det, sinr_det;
        };

        void fill_normals(arma::cx_vec &z, Rng &rng)
        {
            std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
            for (auto &v : z)
                v = cx(nd(rng), nd(rng));
        }

        EngineOutput run_engine(const EngineSpec &spec)
        {
            const auto &users = *spec.users;
            const arma::uword n_users = users.size();
            const arma::uword n_schemes = spec.schemes.front().size();
            const arma::uword M_p = spec.frame.M_p;
            const double rho = spec.rho;
            const double sqrt_rho = std::sqrt(rho);

            EngineOutput out;
            out.nmse.zeros(spec.horizon, n_schemes);
            out.se_det.zeros(spec.horizon, n_schemes);
            out.sinr_det.zeros(spec.horizon, n_schemes);
            out.rx_snr.set_size(spec.horizon, n_schemes);
            out.rx_snr.fill(nan_value);
            out.bf_gain = out.rx_snr;
            out.se_mc = out.rx_snr;

            std::vector<std::vector<Trajectory>> traj(n_users, std::vector<Trajectory>(n_schemes));
            std::vector<arma::vec> innov_sd(n_users);
            for (arma::uword u = 0; u < n_users; ++u)
            {
                const arma::vec &lam = users[u].stats.lambda;
                const double a = users[u].stats.a;
                innov_sd[u] = std::sqrt(1.0 - a * a) * arma::sqrt(lam);
                for (arma::uword s = 0; s < n_schemes; ++s)
                {
                    Trajectory &t = traj[u][s];
                    switch (spec.schemes[u][s].kind)
                    {
                    case SchemeKind::eigen_modes:
                        t.lam_pred = lam;
                        t.lam_est = lam;
                        break;
                    case SchemeKind::general:
                        t.p_pred = arma::diagmat(arma::conv_to<arma::cx_vec>::from(lam));
                        t.p_est = t.p_pred;
                        break;
                    case SchemeKind::perfect:
                        t.lam_est.zeros(lam.n_elem);
                        break;
                    }
                }
            }

            std::vector<RunState> states(spec.runs);
            const std::vector<arma::uword> ranks = [&] {
                std::vector<arma::uword> r(n_users);
                for (arma::uword u = 0; u < n_users; ++u)
                    r[u] = users[u].stats.rank();
                return r;
            }();

            // ell = 0: prior only
            for (arma::uword s = 0; s < n_schemes; ++s)
            {
                double acc = 0.0;
                for (arma::uword u = 0; u < n_users; ++u)
                    acc += spec.schemes[u][s].kind == SchemeKind::perfect ? 0.0 : 1.0;
                out.nmse(0, s) = acc / double(n_users);
            }

            const arma::uword n_threads = std::max<arma::uword>(1, std::min(spec.threads, spec.runs));
            std::vector<std::vector<BlockGain>> gains; // [block in chunk][user * n_schemes + s]
            const arma::uword n_metrics = 3 * n_schemes;
            std::vector<double> metrics; // [run][block in chunk][metric]

            for (arma::uword b0 = 0; b0 < spec.horizon; b0 += chunk_blocks)
            {
                const arma::uword b1 = std::min(spec.horizon, b0 + chunk_blocks);
                const arma::uword nb = b1 - b0;

                // deterministic part
                gains.assign(nb, std::vector<BlockGain>(n_users * n_schemes));
                for (arma::uword ell = b0; ell < b1; ++ell)
                {
                    const arma::uword cyc = ell - 1;
                    for (arma::uword u = 0; u < n_users && ell > 0; ++u)
                    {
                        const arma::vec &lam = users[u].stats.lambda;
                        const double a2 = users[u].stats.a * users[u].stats.a;
                        for (arma::uword s = 0; s < n_schemes; ++s)
                        {
                            const Prepared &p = spec.schemes[u][s];
                            Trajectory &t = traj[u][s];
                            BlockGain &bg = gains[ell - b0][u * n_schemes + s];
                            if (p.kind == SchemeKind::eigen_modes)
                            {
                                if (ell > 1)
                                    t.lam_pred = a2 * t.lam_est + (1.0 - a2) * lam;
                                bg.modes = p.modes[cyc % p.period];
                                bg.k.set_size(bg.modes.n_elem);
                                t.lam_est = t.lam_pred;
                                for (arma::uword j = 0; j < bg.modes.n_elem; ++j)
                                {
                                    const double lp = t.lam_pred(bg.modes(j));
                                    bg.k(j) = lp * sqrt_rho / (rho * lp + 1.0);
                                    t.lam_est(bg.modes(j)) = lp / (rho * lp + 1.0);
                                }
                            }
                            else if (p.kind == SchemeKind::general)
                            {
                                if (ell > 1)
                                {
                                    t.p_pred = a2 * t.p_est;
                                    t.p_pred.diag() += arma::conv_to<arma::cx_vec>::from((1.0 - a2) * lam);
                                }
                                bg.s = p.reduced[cyc % p.period];
                                bg.kg = kalman_gain(t.p_pred, bg.s);
                                t.p_est = t.p_pred - bg.kg * (bg.s.t() * t.p_pred);
                                t.p_est = 0.5 * (t.p_est + t.p_est.t());
                            }
                        }
                    }

                    for (arma::uword s = 0; s < n_schemes; ++s)
                    {
                        const SchemeKind kind = spec.schemes[0][s].kind;
                        if (ell == 0 && kind != SchemeKind::perfect)
                            continue;
                        std::vector<arma::vec> lam_bar(n_users);
                        std::vector<arma::cx_mat> p_bar(n_users);
                        double nmse = 0.0;
                        for (arma::uword u = 0; u < n_users; ++u)
                        {
                            const Trajectory &t = traj[u][s];
                            double tr = 0.0;
                            if (kind == SchemeKind::general)
                            {
                                p_bar[u] = t.p_est;
                                tr = std::real(arma::trace(t.p_est));
                            }
                            else
                            {
                                lam_bar[u] = t.lam_est;
                                tr = arma::accu(t.lam_est);
                            }
                            if (kind != SchemeKind::perfect)
                                nmse += (tr + users[u].discarded) / users[u].trace_r;
                        }
                        out.nmse(ell, s) = nmse / double(n_users);
                        double se = 0.0, sinr = 0.0;
                        for (arma::uword u = 0; u < n_users; ++u)
                        {
                            const DeterministicTerms d = kind == SchemeKind::general
                                                             ? deterministic_terms(*spec.scene, p_bar, u)
                                                             : deterministic_terms(*spec.scene, lam_bar, u);
                            se += spectral_efficiency(d.sinr, n_users, M_p, spec.frame.M);
                            sinr += d.sinr;
                        }
                        out.se_det(ell, s) = se;
                        out.sinr_det(ell, s) = sinr / double(n_users);
                    }
                }

                // Monte Carlo part
                metrics.assign(spec.runs * nb * n_metrics, 0.0);
                auto worker = [&](arma::uword r0, arma::uword r1) {
                    std::vector<arma::cx_vec> z(n_users);
                    for (arma::uword u = 0; u < n_users; ++u)
                        z[u].set_size(ranks[u]);
                    arma::cx_vec w(M_p);
                    std::vector<double> e2(n_users);
                    std::vector<cx> ip(n_users);
                    for (arma::uword run = r0; run < r1; ++run)
                    {
                        RunState &st = states[run];
                        for (arma::uword ell = b0; ell < b1; ++ell)
                        {
                            if (ell == 0)
                            {
                                st.rng = stream_rng(spec.seed, spec.stream, run);
                                st.c.resize(n_users);
                                st.c_hat.assign(n_users, std::vector<arma::cx_vec>(n_schemes));
                                for (arma::uword u = 0; u < n_users; ++u)
                                {
                                    fill_normals(z[u], st.rng);
                                    st.c[u] = arma::sqrt(users[u].stats.lambda) % z[u];
                                    for (arma::uword s = 0; s < n_schemes; ++s)
                                        st.c_hat[u][s] = spec.schemes[u][s].kind == SchemeKind::perfect
                                                             ? st.c[u]
                                                             : arma::cx_vec(ranks[u], arma::fill::zeros);
                                }
                            }
                            else
                            {
                                for (arma::uword u = 0; u < n_users; ++u)
                                {
                                    const double a = users[u].stats.a;
                                    fill_normals(z[u], st.rng);
                                    st.c[u] = a * st.c[u] + innov_sd[u] % z[u];
                                }
                                for (arma::uword u = 0; u < n_users; ++u)
                                {
                                    const double a = users[u].stats.a;
                                    for (arma::uword s = 0; s < n_schemes; ++s)
                                    {
                                        arma::cx_vec &ch = st.c_hat[u][s];
                                        const BlockGain &bg = gains[ell - b0][u * n_schemes + s];
                                        switch (spec.schemes[u][s].kind)
                                        {
                                        case SchemeKind::perfect:
                                            ch = st.c[u];
                                            break;
                                        case SchemeKind::eigen_modes:
                                            ch *= a;
                                            fill_normals(w, st.rng);
                                            for (arma::uword j = 0; j < bg.modes.n_elem; ++j)
                                            {
                                                const arma::uword m = bg.modes(j);
                                                const cx innov = sqrt_rho * (st.c[u](m) - ch(m)) + w(j);
                                                ch(m) += bg.k(j) * innov;
                                            }
                                            break;
                                        case SchemeKind::general:
                                            ch *= a;
                                            fill_normals(w, st.rng);
                                            ch += bg.kg * (bg.s.t() * (st.c[u] - ch) + w);
                                            break;
                                        }
                                    }
                                }
                            }

                            if (ell < spec.record_from)
                                continue;
                            double *row = &metrics[(run * nb + (ell - b0)) * n_metrics];
                            for (arma::uword s = 0; s < n_schemes; ++s)
                            {
                                bool empty = false;
                                for (arma::uword u = 0; u < n_users; ++u)
                                {
                                    const arma::cx_vec &ch = st.c_hat[u][s];
                                    e2[u] = std::real(arma::cdot(ch, ch));
                                    ip[u] = arma::cdot(st.c[u], ch);
                                    empty = empty || !(e2[u] > 0.0);
                                }
                                if (empty)
                                    continue;
                                double rx = 0.0, bf = 0.0, se = 0.0;
                                for (arma::uword u = 0; u < n_users; ++u)
                                {
                                    bf += rho * std::norm(ip[u]) / e2[u];
                                    double noise = double(n_users) * e2[u] / rho + std::norm(ip[u] - e2[u]);
                                    for (arma::uword v = 0; v < n_users; ++v)
                                    {
                                        if (v == u)
                                            continue;
                                        const cx x = arma::cdot(st.c[u], spec.scene->cross(u, v) * st.c_hat[v][s]);
                                        noise += e2[u] / e2[v] * std::norm(x);
                                    }
                                    const double sinr = e2[u] * e2[u] / noise;
                                    rx += sinr;
                                    se += spectral_efficiency(sinr, n_users, M_p, spec.frame.M);
                                }
                                row[3 * s] = rx / double(n_users);
                                row[3 * s + 1] = bf / double(n_users);
                                row[3 * s + 2] = se;
                            }
                        }
                    }
                };

                std::vector<std::thread> pool;
                const arma::uword per = spec.runs / n_threads, extra = spec.runs % n_threads;
                arma::uword r0 = 0;
                for (arma::uword t = 0; t < n_threads; ++t)
                {
                    const arma::uword r1 = r0 + per + (t < extra ? 1 : 0);
                    if (t + 1 == n_threads)
                        worker(r0, r1);
                    else
                        pool.emplace_back(worker, r0, r1);
                    r0 = r1;
                }
                for (auto &th : pool)
                    th.join();

                for (arma::uword ell = std::max(b0, spec.record_from); ell < b1; ++ell)
                    for (arma::uword s = 0; s < n_schemes; ++s)
                    {
                        double rx = 0.0, bf = 0.0, se = 0.0;
                        for (arma::uword run = 0; run < spec.runs; ++run)
                        {
                            const double *row = &metrics[(run * nb + (ell - b0)) * n_metrics];
                            rx += row[3 * s];
                            bf += row[3 * s + 1];
                            se += row[3 * s + 2];
                        }
                        out.rx_snr(ell, s) = rx / double(spec.runs);
                        out.bf_gain(ell, s) = bf / double(spec.runs);
                        out.se_mc(ell, s) = se / double(spec.runs);
                    }
            }
            return out;
        }

        // Steady-state lower bound on the sum spectral efficiency for each scheme (NaN if not applicable).
        std::vector<double> lower_bounds(const std::vector<std::vector<TrainingScheme>> &schemes,
                                         const std::vector<UserChannel> &users, const MultiuserScene &scene,
                                         const FrameParams &frame, double rho)
        {
            const arma::uword n_users = users.size(), n_schemes = schemes.front().size();
            std::vector<double> out(n_schemes, nan_value);
            for (arma::uword s = 0; s < n_schemes; ++s)
            {
                if (!schemes[0][s].designed || schemes[0][s].kind != SchemeKind::eigen_modes)
                    continue;
                std::vector<SteadyStateProfile> prof;
                for (arma::uword u = 0; u < n_users; ++u)
                    prof.push_back(profile(users[u].stats.lambda, users[u].stats.a, rho,
                                           padded_intervals(schemes[u][s].assignment, users[u].stats.rank())));
                double se = 0.0;
                for (arma::uword u = 0; u < n_users; ++u)
                    se += spectral_efficiency(steady_state_sinr_lower_bound(scene, prof, u), n_users, frame.M_p,
                                              frame.M);
                out[s] = se;
            }
            return out;
        }

        MultiuserScene make_scene(const std::vector<UserChannel> &users, double rho, const FrameParams &frame)
        {
            std::vector<ChannelStatistics> stats;
            for (const auto &u : users)
                stats.push_back(u.stats);
            return MultiuserScene(std::move(stats), rho, frame.M, frame.M_p);
        }

        std::vector<UserChannel> build_users(const ExperimentConfig &cfg)
        {
            std::vector<UserChannel> users;
            if (cfg.mode == ExperimentMode::single_user)
                users.push_back(build_user_channel(cfg, cfg.geometry.theta_h));
            else
                for (double th : user_angles(cfg))
                    users.push_back(build_user_channel(cfg, th));
            return users;
        }

        std::vector<std::vector<TrainingScheme>> build_all_schemes(const ExperimentConfig &cfg,
                                                                   const std::vector<UserChannel> &users, double rho)
        {
            std::vector<std::vector<TrainingScheme>> out;
            for (arma::uword u = 0; u < users.size(); ++u)
                out.push_back(build_schemes(cfg, users[u], rho, cfg.seed + u));
            return out;
        }

        std::vector<DesignRecord> design_records(const std::vector<std::vector<TrainingScheme>> &schemes,
                                                 const std::vector<UserChannel> &users)
        {
            std::vector<DesignRecord> out;
            for (arma::uword u = 0; u < schemes.size(); ++u)
                for (const auto &s : schemes[u])
                    if (s.designed)
                        out.push_back({s.name, u, users[u].theta_h, s.assignment, s.sequence, s.basis_columns});
            return out;
        }

        EngineSpec make_spec(const ExperimentConfig &cfg, const std::vector<UserChannel> &users,
                             const std::vector<std::vector<TrainingScheme>> &schemes, const MultiuserScene &scene,
                             double rho, std::uint64_t stream, arma::uword record_from)
        {
            EngineSpec spec{&users, {}, &scene, rho, cfg.frame, cfg.horizon_blocks, record_from,
                            cfg.mc_runs, cfg.seed, stream, cfg.resolved_threads()};
            spec.frame.rho = rho;
            for (arma::uword u = 0; u < users.size(); ++u)
            {
                spec.schemes.emplace_back();
                for (const auto &s : schemes[u])
                    spec.schemes.back().push_back(prepare(s, users[u]));
            }
            return spec;
        }

        TraceTable to_trace(const ExperimentConfig &cfg, EngineOutput &&eo, const std::vector<double> &lb)
        {
            TraceTable t;
            t.schemes = cfg.scheme_names();
            t.nmse = std::move(eo.nmse);
            t.rx_snr = std::move(eo.rx_snr);
            t.bf_gain = std::move(eo.bf_gain);
            t.se_mc = std::move(eo.se_mc);
            t.se_det = std::move(eo.se_det);
            t.sinr_det = std::move(eo.sinr_det);
            t.se_lb.set_size(t.nmse.n_rows, t.nmse.n_cols);
            t.se_lb.fill(nan_value);
            for (arma::uword s = 0; s < lb.size(); ++s)
                if (std::isfinite(lb[s]) && t.se_lb.n_rows > 1)
                    t.se_lb.col(s).tail(t.se_lb.n_rows - 1).fill(lb[s]);
            return t;
        }

        double window_mean(const arma::vec &col, arma::uword window)
        {
            const arma::vec tail = col.tail(std::min<arma::uword>(window, col.n_elem));
            const arma::vec fin = tail.elem(arma::find_finite(tail));
            return fin.is_empty() ? nan_value : arma::mean(fin);
        }

        double to_db(double x) { return x > 0.0 ? 10.0 * std::log10(x) : nan_value; }
    } // namespace

    UserChannel build_user_channel(const ExperimentConfig &cfg, double theta_h)
    {
        OneRingGeometry geom = cfg.geometry;
        geom.theta_h = theta_h;
        geom.validate();
        cfg.array.validate();

        UserChannel out;
        out.theta_h = theta_h;
        out.gain = path_loss(geom);
        const OneRingAngles ang = one_ring_params(geom);
        arma::cx_mat r;
        if (cfg.array.kind == ArrayKind::upa)
        {
            out.axis_h = one_ring_covariance(cfg.array.n_h, geom.theta_h, ang.delta_h, out.gain,
                                             cfg.array.spacing_over_wavelength);
            out.axis_v = one_ring_covariance(cfg.array.n_v, ang.theta_v, ang.delta_v, 1.0,
                                             cfg.array.spacing_over_wavelength);
            r = upa_covariance(out.axis_h, out.axis_v);
        }
        else
        {
            r = one_ring_array_covariance(cfg.array, geom);
        }
        out.stats = make_statistics(temporal_coefficient(geom, cfg.frame.M), std::move(r), cfg.rank_tol);
        out.trace_r = std::real(arma::trace(out.stats.r_h));
        out.discarded = std::max(0.0, out.trace_r - arma::accu(out.stats.lambda));
        return out;
    }

    std::vector<double> user_angles(const ExperimentConfig &cfg)
    {
        if (!cfg.users.angles.empty())
            return cfg.users.angles;
        const arma::uword n = cfg.users.count;
        std::vector<double> out(n);
        for (arma::uword u = 0; u < n; ++u)
            out[u] = cfg.users.theta_min +
                     (cfg.users.theta_max - cfg.users.theta_min) * double(u + 1) / double(n + 1);
        return out;
    }

    BaselineTraining::BaselineTraining(const ChannelStatistics &stats, const FrameParams &frame, std::uint64_t seed)
        : stats_(&stats), frame_(frame)
    {
        const arma::uword n_t = stats.n_t();
        orthogonal_ = dft_matrix(n_t);
        Rng rng = stream_rng(seed, 0x7261'6e64ULL, 0);
        random_.set_size(n_t, n_t);
        for (arma::uword k = 0; k < n_t; ++k)
        {
            arma::cx_vec v = complex_normal(n_t, rng);
            random_.col(k) = v / arma::norm(v);
        }
    }

    arma::uword BaselineTraining::period(const std::string &scheme) const
    {
        const arma::uword M_p = frame_.M_p;
        if (scheme == "orthogonal" || scheme == "random")
        {
            const arma::uword n = stats_->n_t();
            return n / std::gcd(n, M_p);
        }
        if (scheme == "mp_fixed")
            return 1;
        if (scheme == "nd_fixed")
        {
            const arma::uword n = std::min(frame_.N_d, stats_->rank());
            return n / std::gcd(n, std::min(n, M_p));
        }
        throw std::invalid_argument("baseline_training: unknown scheme " + scheme);
    }

    arma::uvec BaselineTraining::trained_modes(const std::string &scheme, arma::uword block) const
    {
        const arma::uword r = stats_->rank();
        if (scheme == "mp_fixed")
            return arma::regspace<arma::uvec>(0, std::min(frame_.M_p, r) - 1);
        if (scheme == "nd_fixed")
        {
            const arma::uword n = std::min(frame_.N_d, r);
            const arma::uword k = std::min(n, frame_.M_p);
            arma::uvec m(k);
            for (arma::uword j = 0; j < k; ++j)
                m(j) = (block * k + j) % n;
            return m;
        }
        throw std::invalid_argument("baseline_training: scheme " + scheme + " does not train eigenmodes");
    }

    arma::cx_mat BaselineTraining::operator()(const std::string &scheme, arma::uword block) const
    {
        const double sr = std::sqrt(frame_.rho);
        if (scheme == "mp_fixed" || scheme == "nd_fixed")
            return sr * stats_->u.cols(trained_modes(scheme, block));
        if (scheme != "orthogonal" && scheme != "random")
            throw std::invalid_argument("baseline_training: unknown scheme " + scheme);

        const arma::uword n = stats_->n_t();
        if (frame_.M_p > n)
            throw std::invalid_argument("baseline_training: M_p exceeds the number of antennas");
        arma::uvec idx(frame_.M_p);
        for (arma::uword j = 0; j < frame_.M_p; ++j)
            idx(j) = (block * frame_.M_p + j) % n;
        if (scheme == "orthogonal")
            return sr * orthogonal_.cols(idx);

        arma::cx_mat q, rr;
        arma::qr_econ(q, rr, random_.cols(idx));
        return sr * q;
    }

    arma::uword TrainingScheme::period() const
    {
        switch (kind)
        {
        case SchemeKind::eigen_modes:
            return modes.size();
        case SchemeKind::general:
            return pilots.size();
        case SchemeKind::perfect:
            return 1;
        }
        return 1;
    }

    std::vector<TrainingScheme> build_schemes(const ExperimentConfig &cfg, const UserChannel &user, double rho,
                                              std::uint64_t seed)
    {
        FrameParams frame = cfg.frame;
        frame.rho = rho;
        frame.validate();
        const ChannelStatistics &st = user.stats;

        std::vector<TrainingScheme> out;
        for (const auto &designer : cfg.designers)
            for (const auto &basis : cfg.bases)
            {
                TrainingScheme s;
                s.name = basis == "dft" ? designer + "_dft" : designer;
                s.designed = true;
                if (basis == "eigen")
                {
                    s.kind = SchemeKind::eigen_modes;
                    s.assignment = run_designer(designer, st.lambda, st.a, frame);
                    s.sequence = construct_sequence_matrix(s.assignment, frame);
                    for (arma::uword b = 0; b < frame.G; ++b)
                        s.modes.push_back(s.sequence.trained_modes(b));
                }
                else if (basis == "dft")
                {
                    const DftBasis db = cfg.array.kind == ArrayKind::upa
                                            ? dft_approximation_upa(user.axis_h, user.axis_v, st.rank())
                                            : dft_approximation(st.r_h, st.rank());
                    s.kind = SchemeKind::general;
                    s.assignment = run_designer(designer, db.lambda_tilde, st.a, frame);
                    s.sequence = construct_sequence_matrix(s.assignment, frame);
                    s.basis_columns = db.column_indices;
                    s.pilots = expand_training_signals(s.sequence, db.f_tilde, rho);
                }
                else
                {
                    throw std::invalid_argument("unknown basis: " + basis);
                }
                out.push_back(std::move(s));
            }

        const BaselineTraining base(st, frame, seed);
        for (const auto &name : cfg.baselines)
        {
            if (!is_baseline(name))
                throw std::invalid_argument("unknown baseline: " + name);
            TrainingScheme s;
            s.name = name;
            if (name == "perfect_csit")
                s.kind = SchemeKind::perfect;
            else if (name == "mp_fixed" || name == "nd_fixed")
            {
                s.kind = SchemeKind::eigen_modes;
                for (arma::uword b = 0; b < base.period(name); ++b)
                    s.modes.push_back(base.trained_modes(name, b));
            }
            else
            {
                s.kind = SchemeKind::general;
                for (arma::uword b = 0; b < base.period(name); ++b)
                    s.pilots.push_back(base(name, b));
            }
            out.push_back(std::move(s));
        }
        return out;
    }

    SimulationResult design_only(const ExperimentConfig &cfg)
    {
        cfg.validate();
        SimulationResult res;
        res.config = cfg;
        res.users = build_users(cfg);
        const auto schemes = build_all_schemes(cfg, res.users, cfg.frame.rho);
        res.designs = design_records(schemes, res.users);
        return res;
    }

    SimulationResult run_single_user(const ExperimentConfig &cfg)
    {
        cfg.validate();
        if (cfg.mode != ExperimentMode::single_user)
            throw std::invalid_argument("run_single_user: config is not in single_user mode");
        SimulationResult res;
        res.config = cfg;
        res.users = build_users(cfg);
        const double rho = cfg.frame.rho;
        const auto schemes = build_all_schemes(cfg, res.users, rho);
        res.designs = design_records(schemes, res.users);
        const MultiuserScene scene = make_scene(res.users, rho, cfg.frame);
        const auto lb = lower_bounds(schemes, res.users, scene, cfg.frame, rho);
        res.trace = to_trace(cfg, run_engine(make_spec(cfg, res.users, schemes, scene, rho, 0, 0)), lb);
        return res;
    }

    SimulationResult run_multiuser(const ExperimentConfig &cfg)
    {
        cfg.validate();
        if (cfg.mode != ExperimentMode::multiuser)
            throw std::invalid_argument("run_multiuser: config is not in multiuser mode");
        SimulationResult res;
        res.config = cfg;
        res.users = build_users(cfg);

        {
            const double rho = cfg.frame.rho;
            const auto schemes = build_all_schemes(cfg, res.users, rho);
            res.designs = design_records(schemes, res.users);
            const MultiuserScene scene = make_scene(res.users, rho, cfg.frame);
            const auto lb = lower_bounds(schemes, res.users, scene, cfg.frame, rho);
            res.trace = to_trace(cfg, run_engine(make_spec(cfg, res.users, schemes, scene, rho, 0, 0)), lb);
        }

        const arma::uword window = std::min(cfg.horizon_blocks, 2 * cfg.frame.G);
        const auto names = cfg.scheme_names();
        for (arma::uword k = 0; k < cfg.snr_db.size(); ++k)
        {
            // SNR = gamma rho; all users share the BS distance
            const double rho = std::pow(10.0, cfg.snr_db[k] / 10.0) / res.users.front().gain;
            const auto schemes = build_all_schemes(cfg, res.users, rho);
            const MultiuserScene scene = make_scene(res.users, rho, cfg.frame);
            const auto lb = lower_bounds(schemes, res.users, scene, cfg.frame, rho);
            const EngineOutput eo =
                run_engine(make_spec(cfg, res.users, schemes, scene, rho, k + 1, cfg.horizon_blocks - window));
            for (arma::uword s = 0; s < names.size(); ++s)
                res.sweep.push_back({cfg.snr_db[k], names[s], window_mean(eo.se_mc.col(s), window),
                                     window_mean(eo.se_det.col(s), window), lb[s]});
        }
        return res;
    }

    SimulationResult run_experiment(const ExperimentConfig &cfg)
    {
        return cfg.mode == ExperimentMode::multiuser ? run_multiuser(cfg) : run_single_user(cfg);
    }

    std::vector<SteadyStateRow> steady_state_summary(const TraceTable &trace, arma::uword window)
    {
        std::vector<SteadyStateRow> out;
        for (arma::uword s = 0; s < trace.schemes.size(); ++s)
            out.push_back({trace.schemes[s], window_mean(trace.nmse.col(s), window),
                           to_db(window_mean(trace.rx_snr.col(s), window)),
                           to_db(window_mean(trace.bf_gain.col(s), window)),
                           to_db(window_mean(trace.sinr_det.col(s), window)), window_mean(trace.se_mc.col(s), window),
                           window_mean(trace.se_det.col(s), window), window_mean(trace.se_lb.col(s), window)});
        return out;
    }

} // namespace pilotseq
