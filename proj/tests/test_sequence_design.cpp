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


#include "catch2/catch_amalgamated.hpp"

#include "pilotseq/channel_model.hpp"
#include "pilotseq/kalman.hpp"
#include "pilotseq/sequence_design.hpp"
#include "pilotseq/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace pilotseq;
using Catch::Approx;

namespace
{
    double upper_oracle(double lambda, double a, double rho, unsigned g)
    {
        const double c = std::pow(a, 2.0 * g);
        const double half = 0.5 * (1.0 + lambda * rho);
        const double lo = lambda / (half + std::sqrt(half * half + c / (1.0 - c) * lambda * rho));
        const double d = std::pow(a, 2.0 * (g - 1));
        return d * lo + (1.0 - d) * lambda;
    }

    // Minimum objective over every g in I_G^{n_d} (any order) for every admissible n_d.
    double brute_force(const arma::vec &lambda, double a, double rho, const FrameParams &f)
    {
        const auto div = divisor_set(f.G);
        const arma::uword cap = std::min({f.G * f.M_p, f.N_d, arma::uword(lambda.n_elem)});
        double best = std::numeric_limits<double>::infinity();
        for (arma::uword n_d = f.M_p; n_d <= cap; ++n_d)
        {
            std::vector<std::size_t> idx(n_d, 0);
            while (true)
            {
                arma::uword slots = 0;
                for (auto k : idx)
                    slots += f.G / div[k];
                if (slots == f.G * f.M_p)
                {
                    double obj = 0.0;
                    for (arma::uword i = 0; i < lambda.n_elem; ++i)
                        obj += i < n_d ? upper_oracle(lambda(i), a, rho, unsigned(div[idx[i]])) : lambda(i);
                    best = std::min(best, obj);
                }
                std::size_t pos = 0;
                while (pos < n_d && ++idx[pos] == div.size())
                    idx[pos++] = 0;
                if (pos == n_d)
                    break;
            }
        }
        return best;
    }

    // Random valid assignment by repeatedly splitting one pilot slot into p slots of p-fold interval.
    IntervalAssignment random_assignment(arma::uword G, arma::uword p, arma::uword M_p, std::mt19937_64 &rng)
    {
        std::vector<arma::uword> g(M_p, 1);
        std::uniform_int_distribution<int> splits(0, int(2 * M_p * 3));
        const int n_split = splits(rng);
        for (int s = 0; s < n_split; ++s)
        {
            std::vector<std::size_t> open;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (g[i] < G)
                    open.push_back(i);
            if (open.empty())
                break;
            const std::size_t i = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
            g[i] *= p;
            for (arma::uword k = 1; k < p; ++k)
                g.push_back(g[i]);
        }
        std::sort(g.begin(), g.end());
        IntervalAssignment asn;
        asn.g = arma::uvec(g);
        return asn;
    }

    arma::vec decaying_spectrum(arma::uword r, double rate, std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> u(0.5, 1.5);
        arma::vec l(r);
        for (arma::uword i = 0; i < r; ++i)
            l(i) = std::exp(-rate * i) * u(rng);
        return arma::sort(l, "descend");
    }
}

TEST_CASE("Sequence design - divisor sets")
{
    CHECK(divisor_set(8) == std::vector<arma::uword>{1, 2, 4, 8});
    CHECK(divisor_set(1) == std::vector<arma::uword>{1});
    CHECK(divisor_set(9) == std::vector<arma::uword>{1, 3, 9});
    CHECK(is_prime_power(32));
    CHECK(is_prime_power(27));
    CHECK(is_prime_power(7));
    CHECK(!is_prime_power(12));
    FrameParams f;
    f.G = 12;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
    f.G = 8;
    f.M = 2;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("Sequence design - assignment validation")
{
    FrameParams f;
    f.G = 4;
    f.M_p = 3;
    f.N_d = 8;
    IntervalAssignment asn;
    asn.g = {1, 2, 2, 2, 4, 4};
    CHECK(validate_assignment(asn, f, 10).empty());
    CHECK(!validate_assignment(asn, f, 5).empty());

    asn.g = {1, 3};
    CHECK(!validate_assignment(asn, f, 10).empty());
    f.M_p = 2;
    asn.g = {1, 2};
    CHECK(!validate_assignment(asn, f, 10).empty());
    asn.g = {2, 1, 2};
    CHECK(!validate_assignment(asn, f, 10).empty());
}

TEST_CASE("Sequence design - exhaustive search")
{
    FrameParams f;
    f.G = 4;
    f.M_p = 2;
    f.M = 5;
    f.N_d = 2;
    const arma::vec lambda = {3.0, 1.0, 0.5, 0.2};
    const IntervalAssignment forced = exhaustive_search(lambda, 0.99, 5.0, f);
    CHECK(arma::all(forced.g == arma::uvec{1, 1}));

    f.N_d = 1;
    CHECK_THROWS_AS(exhaustive_search(lambda, 0.99, 5.0, f), std::invalid_argument);

    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t)
    {
        f.N_d = 6;
        const arma::vec l = decaying_spectrum(6, 0.6, rng);
        const IntervalAssignment e = exhaustive_search(l, 0.995, 10.0, f);
        CHECK(validate_assignment(e, f, 6).empty());
        CHECK(e.objective == Approx(assignment_objective(l, 0.995, 10.0, e.g)).epsilon(0));
        CHECK(e.objective == Approx(brute_force(l, 0.995, 10.0, f)).epsilon(1e-12));
    }
}

TEST_CASE("Sequence design - min-max algorithm")
{
    FrameParams f;
    f.G = 4;
    f.M_p = 1;
    f.M = 5;

    f.N_d = 1;
    const arma::vec lambda = {3.0, 1.0, 0.5, 0.2};
    CHECK(arma::all(min_max_design(lambda, 0.99, 5.0, f).g == arma::uvec{1}));

    // Flat spectrum with N_d = 2 M_p spreads pilots over 2 M_p modes at interval 2
    for (arma::uword mp : {1u, 2u})
    {
        f.M_p = mp;
        f.N_d = 2 * mp;
        const IntervalAssignment flat = min_max_design(arma::vec(8, arma::fill::value(0.7)), 0.999, 10.0, f);
        CHECK(flat.n_d() == 2 * mp);
        CHECK(arma::all(flat.g == 2));
    }

    std::mt19937_64 rng(9);
    double gap_sum = 0.0;
    for (int t = 0; t < 60; ++t)
    {
        f.G = (t % 3 == 0) ? 8 : 4;
        f.M_p = 1 + t % 2;
        f.M = 5;
        f.N_d = 2 + t % 5;
        if (f.N_d < f.M_p)
            f.N_d = f.M_p;
        const arma::vec l = decaying_spectrum(6, 0.2 + 0.1 * (t % 7), rng);
        std::vector<MinMaxTraceStep> trace;
        const IntervalAssignment mm = min_max_design(l, 0.995, 10.0, f, &trace);
        CHECK(validate_assignment(mm, f, 6).empty());
        for (std::size_t k = 1; k < trace.size(); ++k)
            CHECK((trace[k].n_blk < trace[k - 1].n_blk || trace[k].candidates < trace[k - 1].candidates));
        const IntervalAssignment ex = exhaustive_search(l, 0.995, 10.0, f);
        CHECK(mm.objective >= ex.objective * (1.0 - 1e-14));
        gap_sum += mm.objective / ex.objective - 1.0;
    }
    // Greedy loses a few percent on average; single tiny instances can lose more
    CHECK(gap_sum / 60.0 < 0.05);
}

TEST_CASE("Sequence design - construction of the sequence matrix")
{
    FrameParams f;
    f.G = 4;
    f.M_p = 3;
    f.M = 5;
    f.N_d = 6;
    IntervalAssignment asn;
    asn.g = {1, 2, 2, 2, 4, 4};
    const SequenceMatrix c = construct_sequence_matrix(asn, f);
    CHECK(check_sequence_matrix(c, asn.g).empty());

    SequenceMatrix ref;
    ref.n_d = 6;
    ref.c = arma::umat{{1, 2, 4}, {1, 3, 5}, {1, 2, 4}, {1, 3, 6}};
    CHECK(check_sequence_matrix(ref, asn.g).empty());
    SequenceMatrix broken = ref;
    broken.c(3, 2) = 5;
    CHECK(!check_sequence_matrix(broken, asn.g).empty());

    asn.g = {1, 1, 1};
    const SequenceMatrix ones = construct_sequence_matrix(asn, f);
    for (arma::uword q = 0; q < 4; ++q)
        CHECK(arma::all(ones.c.row(q) == arma::urowvec{1, 2, 3}));

    asn.g = {1, 2};
    CHECK_THROWS_AS(construct_sequence_matrix(asn, f), std::invalid_argument);

    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t)
    {
        const arma::uword G = arma::uword(4) << (t % 4);
        f.G = G;
        f.M_p = 1 + t % 3;
        f.M = f.M_p + 1;
        f.N_d = G * f.M_p;
        const IntervalAssignment r = random_assignment(G, 2, f.M_p, rng);
        const SequenceMatrix s = construct_sequence_matrix(r, f);
        CHECK(check_sequence_matrix(s, r.g).empty());
    }
    for (int t = 0; t < 30; ++t)
    {
        f.G = 9;
        f.M_p = 2;
        f.M = 3;
        f.N_d = 18;
        const IntervalAssignment r = random_assignment(9, 3, 2, rng);
        CHECK(check_sequence_matrix(construct_sequence_matrix(r, f), r.g).empty());
    }
}

TEST_CASE("Sequence design - training signal expansion")
{
    FrameParams f;
    f.G = 4;
    f.M_p = 3;
    f.M = 5;
    f.N_d = 6;
    IntervalAssignment asn;
    asn.g = {1, 2, 2, 2, 4, 4};
    const SequenceMatrix c = construct_sequence_matrix(asn, f);

    const arma::cx_mat r = one_ring_covariance(32, 0.3, 0.3, 1.0);
    const Eigensystem es = eigendecompose(r);
    const double rho = 7.0;
    for (const arma::cx_mat &basis : {es.u, dft_approximation(r, 8).f_tilde})
    {
        const auto s = expand_training_signals(c, basis, rho);
        REQUIRE(s.size() == 4);
        for (const auto &sl : s)
        {
            CHECK(arma::abs(sl.t() * sl - rho * arma::eye<arma::cx_mat>(3, 3)).max() < 1e-12);
            CHECK(std::pow(arma::norm(sl, "fro"), 2) == Approx(rho * 3.0).epsilon(1e-12));
        }
        CHECK(arma::abs(s[1].col(1) - std::sqrt(rho) * basis.col(c.c(1, 1) - 1)).max() == 0.0);
    }
    CHECK(arma::all(c.trained_modes(6) == c.trained_modes(2)));
    CHECK_THROWS_AS(expand_training_signals(c, es.u.cols(0, 3), rho), std::out_of_range);
}

TEST_CASE("Sequence design - CSV round trip")
{
    FrameParams f;
    f.G = 4;
    f.M_p = 3;
    f.M = 5;
    f.N_d = 6;
    IntervalAssignment asn;
    asn.g = {1, 2, 2, 2, 4, 4};
    const SequenceMatrix c = construct_sequence_matrix(asn, f);
    const std::string text = sequence_to_csv(c, asn.g);
    CHECK(text.rfind("# G=4 Mp=3 nd=6 g=1,2,2,2,4,4\n", 0) == 0);
    const ParsedSequence back = sequence_from_csv(text);
    CHECK(arma::all(arma::vectorise(back.seq.c == c.c)));
    CHECK(arma::all(back.g == asn.g));
    CHECK_THROWS_AS(sequence_from_csv("1,2,3\n"), std::invalid_argument);
}

TEST_CASE("Sequence design - filter under the constructed sequence reaches the envelopes")
{
    FrameParams f;
    f.G = 8;
    f.M_p = 2;
    f.M = 5;
    f.N_d = 8;
    const double a = 0.95, rho = 10.0;
    const arma::vec lambda = {4.0, 2.0, 1.2, 0.8, 0.5, 0.3, 0.2, 0.1, 0.05};
    const IntervalAssignment asn = min_max_design(lambda, a, rho, f);
    const SequenceMatrix c = construct_sequence_matrix(asn, f);
    arma::uvec g(lambda.n_elem, arma::fill::zeros);
    g.head(asn.n_d()) = asn.g;
    const SteadyStateProfile prof = profile(lambda, a, rho, g);

    arma::vec lp = lambda, lb;
    const arma::uword frames = arma::uword(60.0 / (1.0 - a * a));
    arma::vec post(lambda.n_elem, arma::fill::zeros), peak(lambda.n_elem, arma::fill::zeros);
    for (arma::uword l = 0; l < frames * f.G; ++l)
    {
        const arma::uvec modes = c.trained_modes(l);
        lb = diagonal_posterior(lp, modes, rho);
        if (l >= (frames - 1) * f.G)
        {
            for (auto i : modes)
                post(i) = lb(i);
            peak = arma::max(peak, lb);
        }
        lp = diagonal_prediction(lb, a, lambda);
    }
    for (arma::uword i = 0; i < asn.n_d(); ++i)
    {
        CHECK(std::abs(post(i) - prof.lambda_lower(i)) < 1e-5);
        CHECK(std::abs(peak(i) - prof.lambda_upper(i)) < 1e-5);
    }
}
