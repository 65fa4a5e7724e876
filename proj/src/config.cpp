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


#include "pilotseq/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pilotseq
{
    using nlohmann::json;

    namespace
    {
        const std::vector<std::string> known_designers = {"min_max", "exhaustive"};
        const std::vector<std::string> known_bases = {"eigen", "dft"};
        const std::vector<std::string> known_baselines = {"orthogonal", "random", "mp_fixed", "nd_fixed", "perfect_csit"};

        bool contains(const std::vector<std::string> &v, const std::string &s)
        {
            return std::find(v.begin(), v.end(), s) != v.end();
        }

        void check_names(const std::vector<std::string> &names, const std::vector<std::string> &known,
                         const std::string &field)
        {
            std::set<std::string> seen;
            for (const auto &n : names)
            {
                if (!contains(known, n))
                    throw std::invalid_argument("config: unknown entry '" + n + "' in " + field);
                if (!seen.insert(n).second)
                    throw std::invalid_argument("config: duplicate entry '" + n + "' in " + field);
            }
        }

        void check_keys(const json &obj, const std::vector<std::string> &allowed, const std::string &where)
        {
            if (!obj.is_object())
                throw std::invalid_argument("config: '" + where + "' must be an object");
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (!contains(allowed, it.key()))
                    throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
        }

        template <typename T>
        void read(const json &obj, const char *key, T &out)
        {
            if (obj.contains(key))
                out = obj.at(key).get<T>();
        }

        constexpr double kmh_per_ms = 3.6;
    } // namespace

    void ExperimentConfig::validate() const
    {
        array.validate();
        geometry.validate();
        frame.validate();
        if (frame.N_d > array.n_t)
            throw std::invalid_argument("config: frame.N_d must not exceed the number of antennas");
        if (mc_runs < 1)
            throw std::invalid_argument("config: mc_runs must be at least 1");
        if (horizon_blocks < frame.G)
            throw std::invalid_argument("config: horizon_blocks must be at least G");
        if (!(rank_tol > 0.0 && rank_tol < 1.0))
            throw std::invalid_argument("config: rank_tol must lie in (0, 1)");
        check_names(designers, known_designers, "designers");
        check_names(bases, known_bases, "bases");
        check_names(baselines, known_baselines, "baselines");
        if (scheme_names().empty())
            throw std::invalid_argument("config: no schemes selected");
        if (!designers.empty() && bases.empty())
            throw std::invalid_argument("config: designers require at least one basis");

        if (mode == ExperimentMode::multiuser)
        {
            const arma::uword n_users = users.angles.empty() ? users.count : users.angles.size();
            if (n_users < 1)
                throw std::invalid_argument("config: users.count must be at least 1");
            if (n_users * frame.M_p >= frame.M)
                throw std::invalid_argument("config: multiuser training requires U * M_p < M");
            if (!(users.theta_min < users.theta_max))
                throw std::invalid_argument("config: users.theta_min must be below users.theta_max");
        }
    }

    std::vector<std::string> ExperimentConfig::scheme_names() const
    {
        std::vector<std::string> out;
        for (const auto &d : designers)
            for (const auto &b : bases)
                out.push_back(b == "dft" ? d + "_dft" : d);
        for (const auto &b : baselines)
            out.push_back(b);
        return out;
    }

    arma::uword ExperimentConfig::resolved_threads() const
    {
        if (threads > 0)
            return threads;
        return std::max(1u, std::thread::hardware_concurrency());
    }

    std::vector<std::string> preset_names()
    {
        return {"desk", "table3", "table3_ci", "fig9"};
    }

    ExperimentConfig preset(const std::string &name)
    {
        constexpr double pi = std::numbers::pi;
        ExperimentConfig c;
        c.name = name;
        c.geometry.theta_h = pi / 6.0;
        if (name == "desk")
        {
            c.array = ArrayGeometry::ula(32);
            c.frame = {16, 2, 5, 32, 10.0};
            c.mc_runs = 100;
            c.horizon_blocks = 512;
            return c;
        }
        if (name == "table3_ci")
        {
            c.array = ArrayGeometry::ula(32);
            c.frame = {32, 2, 5, 32, 10.0};
            c.mc_runs = 200;
            c.horizon_blocks = 1024;
            return c;
        }
        if (name == "table3")
        {
            c.array = ArrayGeometry::upa(15, 25);
            c.frame = {32, 2, 5, 64, 10.0};
            c.mc_runs = 500;
            c.horizon_blocks = 1024;
            return c;
        }
        if (name == "fig9")
        {
            c.mode = ExperimentMode::multiuser;
            c.array = ArrayGeometry::ula(32);
            c.frame = {32, 1, 10, 8, 10.0};
            c.geometry.d_r = c.geometry.d_s * std::tan(4.6 * pi / 180.0);
            c.users.count = 5;
            c.designers = {"min_max"};
            c.bases = {"eigen"};
            c.baselines = {"perfect_csit"};
            c.snr_db = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
            c.mc_runs = 100;
            c.horizon_blocks = 1024;
            return c;
        }
        throw std::invalid_argument("unknown preset '" + name + "'");
    }

    std::string config_to_json(const ExperimentConfig &c)
    {
        json j;
        j["name"] = c.name;
        j["mode"] = c.mode == ExperimentMode::multiuser ? "multiuser" : "single_user";
        j["array"] = {{"kind", c.array.kind == ArrayKind::upa ? "upa" : "ula"},
                      {"n_t", c.array.n_t},
                      {"n_v", c.array.n_v},
                      {"n_h", c.array.n_h},
                      {"spacing_over_wavelength", c.array.spacing_over_wavelength}};
        j["geometry"] = {{"d_s", c.geometry.d_s},
                         {"d_r", c.geometry.d_r},
                         {"h", c.geometry.h},
                         {"d_0", c.geometry.d_0},
                         {"alpha_0", c.geometry.alpha_0},
                         {"theta_h", c.geometry.theta_h},
                         {"f_c", c.geometry.f_c},
                         {"t_s", c.geometry.t_s},
                         {"v_kmh", c.geometry.v * kmh_per_ms}};
        j["frame"] = {{"G", c.frame.G}, {"M_p", c.frame.M_p}, {"M", c.frame.M}, {"N_d", c.frame.N_d}, {"rho", c.frame.rho}};
        j["designers"] = c.designers;
        j["bases"] = c.bases;
        j["baselines"] = c.baselines;
        j["users"] = {{"count", c.users.count},
                      {"theta_min", c.users.theta_min},
                      {"theta_max", c.users.theta_max},
                      {"angles", c.users.angles}};
        j["snr_db"] = c.snr_db;
        j["mc_runs"] = c.mc_runs;
        j["seed"] = c.seed;
        j["horizon_blocks"] = c.horizon_blocks;
        j["threads"] = c.threads;
        j["rank_tol"] = c.rank_tol;
        j["output_dir"] = c.output_dir;
        return j.dump(2) + "\n";
    }

    ExperimentConfig config_from_json(const std::string &text, const ExperimentConfig &base)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
        }

        ExperimentConfig c = base;
        try
        {
            check_keys(j, {"name", "mode", "array", "geometry", "frame", "designers", "bases", "baselines", "users",
                           "snr_db", "mc_runs", "seed", "horizon_blocks", "threads", "rank_tol", "output_dir"},
                       "config");
            read(j, "name", c.name);
            if (j.contains("mode"))
            {
                const std::string m = j.at("mode").get<std::string>();
                if (m == "single_user")
                    c.mode = ExperimentMode::single_user;
                else if (m == "multiuser")
                    c.mode = ExperimentMode::multiuser;
                else
                    throw std::invalid_argument("config: mode must be single_user or multiuser");
            }
            if (j.contains("array"))
            {
                const json &a = j.at("array");
                check_keys(a, {"kind", "n_t", "n_v", "n_h", "spacing_over_wavelength"}, "array");
                std::string kind = c.array.kind == ArrayKind::upa ? "upa" : "ula";
                arma::uword n_t = c.array.n_t, n_v = c.array.n_v, n_h = c.array.n_h;
                double spacing = c.array.spacing_over_wavelength;
                read(a, "kind", kind);
                read(a, "n_t", n_t);
                read(a, "n_v", n_v);
                read(a, "n_h", n_h);
                read(a, "spacing_over_wavelength", spacing);
                if (kind == "ula")
                    c.array = ArrayGeometry::ula(n_t, spacing);
                else if (kind == "upa")
                {
                    c.array = ArrayGeometry::upa(n_v, n_h, spacing);
                    if (a.contains("n_t") && n_t != n_v * n_h)
                        throw std::invalid_argument("config: array.n_t must equal n_v * n_h for a UPA");
                }
                else
                    throw std::invalid_argument("config: array.kind must be ula or upa");
            }
            if (j.contains("geometry"))
            {
                const json &g = j.at("geometry");
                check_keys(g, {"d_s", "d_r", "h", "d_0", "alpha_0", "theta_h", "f_c", "t_s", "v_kmh"}, "geometry");
                read(g, "d_s", c.geometry.d_s);
                read(g, "d_r", c.geometry.d_r);
                read(g, "h", c.geometry.h);
                read(g, "d_0", c.geometry.d_0);
                read(g, "alpha_0", c.geometry.alpha_0);
                read(g, "theta_h", c.geometry.theta_h);
                read(g, "f_c", c.geometry.f_c);
                read(g, "t_s", c.geometry.t_s);
                if (g.contains("v_kmh"))
                    c.geometry.v = g.at("v_kmh").get<double>() / kmh_per_ms;
            }
            if (j.contains("frame"))
            {
                const json &f = j.at("frame");
                check_keys(f, {"G", "M_p", "M", "N_d", "rho"}, "frame");
                read(f, "G", c.frame.G);
                read(f, "M_p", c.frame.M_p);
                read(f, "M", c.frame.M);
                read(f, "N_d", c.frame.N_d);
                read(f, "rho", c.frame.rho);
            }
            read(j, "designers", c.designers);
            read(j, "bases", c.bases);
            read(j, "baselines", c.baselines);
            if (j.contains("users"))
            {
                const json &u = j.at("users");
                check_keys(u, {"count", "theta_min", "theta_max", "angles"}, "users");
                read(u, "count", c.users.count);
                read(u, "theta_min", c.users.theta_min);
                read(u, "theta_max", c.users.theta_max);
                read(u, "angles", c.users.angles);
            }
            read(j, "snr_db", c.snr_db);
            read(j, "mc_runs", c.mc_runs);
            read(j, "seed", c.seed);
            read(j, "horizon_blocks", c.horizon_blocks);
            read(j, "threads", c.threads);
            read(j, "rank_tol", c.rank_tol);
            read(j, "output_dir", c.output_dir);
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument(std::string("config: wrong value type: ") + e.what());
        }
        return c;
    }

    ExperimentConfig load_config(const std::string &path, const ExperimentConfig &base)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open config file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return config_from_json(ss.str(), base);
    }

} // namespace pilotseq
