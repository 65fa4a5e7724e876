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


#include "pilotseq/sequence_design.hpp"
#include "pilotseq/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pilotseq
{
    namespace
    {
        double upper_envelope(double lambda, double a, double rho, arma::uword g)
        {
            return max_ss_mse(min_ss_mse(lambda, a, rho, g), lambda, a, g);
        }

        arma::uword n_d_cap(const FrameParams &frame, arma::uword rank)
        {
            return std::min({frame.G * frame.M_p, frame.N_d, rank});
        }

        struct ExhaustiveSearch
        {
            const arma::vec &lambda;
            const std::vector<arma::uword> &divisors;
            const std::vector<std::vector<double>> &upper; // upper[i][k] for divisor k
            arma::uword G;

            std::vector<arma::uword> current; // divisor index per position
            std::vector<arma::uword> best;
            double best_objective = 0.0;
            bool found = false;

            void run(arma::uword n_d, arma::uword slots)
            {
                current.assign(n_d, 0);
                recurse(0, n_d, slots, 0, 0.0);
            }

            void recurse(arma::uword pos, arma::uword n_d, arma::uword remaining, arma::uword min_k, double partial)
            {
                if (pos == n_d)
                {
                    if (remaining != 0)
                        return;
                    double obj = partial;
                    for (arma::uword i = n_d; i < lambda.n_elem; ++i)
                        obj += lambda(i);
                    if (!found || obj < best_objective)
                    {
                        found = true;
                        best_objective = obj;
                        best = current;
                    }
                    return;
                }
                const arma::uword left_after = n_d - pos - 1;
                for (arma::uword k = min_k; k < divisors.size(); ++k)
                {
                    const arma::uword use = G / divisors[k];
                    if (use > remaining)
                        continue;
                    const arma::uword rest = remaining - use;
                    // Later entries use at least 1 and at most `use` slots each
                    if (rest < left_after || rest > left_after * use)
                        continue;
                    current[pos] = k;
                    recurse(pos + 1, n_d, rest, k, partial + upper[pos][k]);
                }
            }
        };
    } // namespace

    void FrameParams::validate() const
    {
        if (G < 1 || !is_prime_power(G))
            throw std::invalid_argument("FrameParams: G must be a prime power");
        if (M_p < 1)
            throw std::invalid_argument("FrameParams: M_p must be at least 1");
        if (M <= M_p)
            throw std::invalid_argument("FrameParams: M must exceed M_p");
        if (N_d < 1)
            throw std::invalid_argument("FrameParams: N_d must be at least 1");
        if (!(rho >= 0.0))
            throw std::invalid_argument("FrameParams: rho must be non-negative");
    }

    std::vector<arma::uword> divisor_set(arma::uword G)
    {
        if (G < 1)
            throw std::invalid_argument("divisor_set: G must be at least 1");
        std::vector<arma::uword> d;
        for (arma::uword k = 1; k <= G; ++k)
            if (G % k == 0)
                d.push_back(k);
        return d;
    }

    bool is_prime_power(arma::uword n)
    {
        if (n == 1)
            return true; // p^0
        arma::uword p = 2;
        while (p * p <= n && n % p != 0)
            ++p;
        if (n % p != 0)
            p = n;
        while (n % p == 0)
            n /= p;
        return n == 1;
    }

    double assignment_objective(const arma::vec &lambda, double a, double rho, const arma::uvec &g)
    {
        if (g.n_elem > lambda.n_elem)
            throw std::invalid_argument("assignment_objective: more intervals than eigenmodes");
        double obj = 0.0;
        for (arma::uword i = 0; i < lambda.n_elem; ++i)
            obj += (i < g.n_elem) ? upper_envelope(lambda(i), a, rho, g(i)) : lambda(i);
        return obj;
    }

    IntervalAssignment exhaustive_search(const arma::vec &lambda, double a, double rho, const FrameParams &frame)
    {
        frame.validate();
        const arma::uword cap = n_d_cap(frame, lambda.n_elem);
        if (frame.M_p > cap)
            throw std::invalid_argument("exhaustive_search: infeasible, M_p exceeds min(G M_p, N_d, r)");

        const auto divisors = divisor_set(frame.G);
        std::vector<std::vector<double>> upper(cap, std::vector<double>(divisors.size()));
        for (arma::uword i = 0; i < cap; ++i)
            for (std::size_t k = 0; k < divisors.size(); ++k)
                upper[i][k] = upper_envelope(lambda(i), a, rho, divisors[k]);

        ExhaustiveSearch search{lambda, divisors, upper, frame.G, {}, {}, 0.0, false};
        for (arma::uword n_d = frame.M_p; n_d <= cap; ++n_d)
            search.run(n_d, frame.G * frame.M_p);

        if (!search.found)
            throw std::invalid_argument("exhaustive_search: no feasible interval assignment");

        IntervalAssignment out;
        out.g.set_size(search.best.size());
        for (std::size_t i = 0; i < search.best.size(); ++i)
            out.g(i) = divisors[search.best[i]];
        out.objective = search.best_objective;
        return out;
    }

    IntervalAssignment min_max_design(const arma::vec &lambda, double a, double rho, const FrameParams &frame,
                                      std::vector<MinMaxTraceStep> *trace)
    {
        frame.validate();
        const arma::uword G = frame.G;
        const arma::uword n_cand = std::min(frame.N_d, arma::uword(lambda.n_elem));
        if (frame.M_p > n_cand)
            throw std::invalid_argument("min_max_design: infeasible, M_p exceeds min(N_d, r)");

        const auto divisors = divisor_set(G);
        std::vector<arma::uword> g(n_cand, G + 1);
        std::vector<bool> allocated(n_cand, false), candidate(n_cand, true);
        std::vector<double> upper(lambda.begin(), lambda.begin() + n_cand);
        arma::uword n_candidates = n_cand;
        arma::uword n_blk = G * frame.M_p;

        while (n_blk > 0)
        {
            if (n_candidates == 0)
                throw std::runtime_error("min_max_design: candidate set exhausted with unallocated pilot slots");

            arma::uword best = n_cand;
            for (arma::uword i = 0; i < n_cand; ++i)
                if (candidate[i] && (best == n_cand || upper[i] > upper[best]))
                    best = i;

            MinMaxTraceStep step{n_blk, n_candidates, best, false};

            if (g[best] == 1)
            {
                candidate[best] = false;
                --n_candidates;
                if (trace)
                    trace->push_back(step);
                continue;
            }

            arma::uword d_star = 1;
            for (const arma::uword d : divisors)
                if (d < g[best])
                    d_star = d;

            const arma::uword available = n_blk + (allocated[best] ? G / g[best] : 0);
            if (available >= G / d_star)
            {
                n_blk = available - G / d_star;
                g[best] = d_star;
                allocated[best] = true;
                upper[best] = upper_envelope(lambda(best), a, rho, d_star);
                step.reallocated = true;
            }
            else
            {
                candidate[best] = false;
                --n_candidates;
            }
            if (trace)
                trace->push_back(step);
        }

        arma::uword n_d = 0;
        while (n_d < n_cand && allocated[n_d])
            ++n_d;
        for (arma::uword i = n_d; i < n_cand; ++i)
            if (allocated[i])
                throw std::logic_error("min_max_design: allocated modes do not form a leading block");

        IntervalAssignment out;
        out.g.set_size(n_d);
        for (arma::uword i = 0; i < n_d; ++i)
            out.g(i) = g[i];
        out.objective = assignment_objective(lambda, a, rho, out.g);
        return out;
    }

    std::vector<std::string> validate_assignment(const IntervalAssignment &asn, const FrameParams &frame,
                                                 arma::uword rank)
    {
        std::vector<std::string> v;
        const arma::uword n_d = asn.n_d();
        const arma::uword G = frame.G;

        arma::uword slots = 0;
        for (arma::uword i = 0; i < n_d; ++i)
        {
            const arma::uword gi = asn.g(i);
            if (gi == 0 || G % gi != 0)
            {
                v.push_back("g[" + std::to_string(i) + "]=" + std::to_string(gi) + " is not a divisor of G=" +
                            std::to_string(G));
                continue;
            }
            slots += G / gi;
            if (i > 0 && asn.g(i - 1) > gi)
                v.push_back("g is not nondecreasing at position " + std::to_string(i));
        }
        if (slots != G * frame.M_p)
            v.push_back("sum of 1/g_i differs from M_p (" + std::to_string(slots) + " of " +
                        std::to_string(G * frame.M_p) + " pilot slots)");
        if (n_d < frame.M_p)
            v.push_back("n_d=" + std::to_string(n_d) + " is below M_p");
        if (n_d > n_d_cap(frame, rank))
            v.push_back("n_d=" + std::to_string(n_d) + " exceeds min(G M_p, N_d, r)");
        return v;
    }

    arma::uvec SequenceMatrix::trained_modes(arma::uword block) const
    {
        const arma::uword row = block % c.n_rows;
        arma::uvec out(c.n_cols);
        for (arma::uword j = 0; j < c.n_cols; ++j)
            out(j) = c(row, j) - 1;
        return out;
    }

    std::vector<std::string> check_sequence_matrix(const SequenceMatrix &seq, const arma::uvec &g)
    {
        std::vector<std::string> v;
        const arma::uword G = seq.G(), M_p = seq.M_p(), n_d = g.n_elem;
        if (seq.n_d != n_d)
            v.push_back("n_d field disagrees with the interval vector");

        std::vector<std::vector<std::pair<arma::uword, arma::uword>>> where(n_d + 1);
        for (arma::uword q = 0; q < G; ++q)
        {
            for (arma::uword j = 0; j < M_p; ++j)
            {
                const arma::uword idx = seq.c(q, j);
                if (idx < 1 || idx > n_d)
                {
                    v.push_back("entry (" + std::to_string(q + 1) + "," + std::to_string(j + 1) + ") out of range");
                    continue;
                }
                where[idx].push_back({q, j});
                for (arma::uword k = 0; k < j; ++k)
                    if (seq.c(q, k) == idx)
                        v.push_back("row " + std::to_string(q + 1) + " repeats index " + std::to_string(idx));
            }
        }

        for (arma::uword i = 1; i <= n_d; ++i)
        {
            const arma::uword gi = g(i - 1);
            const auto &w = where[i];
            const std::string tag = "index " + std::to_string(i);
            if (w.empty())
            {
                v.push_back(tag + " never appears");
                continue;
            }
            if (gi == 0 || G % gi != 0)
            {
                v.push_back(tag + " has an interval that does not divide G");
                continue;
            }
            if (w.size() != G / gi)
                v.push_back(tag + " appears " + std::to_string(w.size()) + " times, expected " +
                            std::to_string(G / gi));
            for (std::size_t k = 1; k < w.size(); ++k)
            {
                if (w[k].second != w[0].second)
                    v.push_back(tag + " occupies more than one column");
                if (w[k].first - w[k - 1].first != gi)
                    v.push_back(tag + " rows are not spaced by g=" + std::to_string(gi));
            }
        }
        return v;
    }

    SequenceMatrix construct_sequence_matrix(const IntervalAssignment &asn, const FrameParams &frame)
    {
        frame.validate();
        const auto violations = validate_assignment(asn, frame, asn.n_d());
        if (!violations.empty())
            throw std::invalid_argument("construct_sequence_matrix: " + violations.front());

        const arma::uword G = frame.G, M_p = frame.M_p, n_d = asn.n_d();
        SequenceMatrix seq;
        seq.n_d = n_d;
        seq.c.zeros(G, M_p);

        arma::uword next = 1;
        for (arma::uword q = 0; q < G; ++q)
        {
            arma::uword j_first = 0;
            while (j_first < M_p && seq.c(q, j_first) != 0)
                ++j_first;
            for (arma::uword j = j_first; j < M_p; ++j)
            {
                if (next > n_d)
                    throw std::logic_error("construct_sequence_matrix: ran out of mode indices");
                const arma::uword gi = asn.g(next - 1);
                for (arma::uword k = 0; k < G / gi; ++k)
                {
                    const arma::uword row = q + k * gi;
                    if (row >= G || seq.c(row, j) != 0)
                        throw std::logic_error("construct_sequence_matrix: periodic placement collides");
                    seq.c(row, j) = next;
                }
                ++next;
            }
        }
        if (next != n_d + 1 || arma::any(arma::vectorise(seq.c) == 0))
            throw std::logic_error("construct_sequence_matrix: allocation left entries undetermined");
        return seq;
    }

    std::vector<arma::cx_mat> expand_training_signals(const SequenceMatrix &seq, const arma::cx_mat &basis,
                                                      double rho)
    {
        const double scale = std::sqrt(rho);
        std::vector<arma::cx_mat> out;
        out.reserve(seq.G());
        for (arma::uword q = 0; q < seq.G(); ++q)
        {
            arma::cx_mat s(basis.n_rows, seq.M_p());
            for (arma::uword j = 0; j < seq.M_p(); ++j)
            {
                const arma::uword idx = seq.c(q, j);
                if (idx < 1 || idx > basis.n_cols)
                    throw std::out_of_range("expand_training_signals: index exceeds the basis size");
                s.col(j) = scale * basis.col(idx - 1);
            }
            out.push_back(std::move(s));
        }
        return out;
    }

    std::string sequence_to_csv(const SequenceMatrix &seq, const arma::uvec &g)
    {
        std::ostringstream os;
        os << "# G=" << seq.G() << " Mp=" << seq.M_p() << " nd=" << seq.n_d << " g=";
        for (arma::uword i = 0; i < g.n_elem; ++i)
            os << (i ? "," : "") << g(i);
        os << "\n";
        for (arma::uword q = 0; q < seq.G(); ++q)
        {
            for (arma::uword j = 0; j < seq.M_p(); ++j)
                os << (j ? "," : "") << seq.c(q, j);
            os << "\n";
        }
        return os.str();
    }

    ParsedSequence sequence_from_csv(const std::string &text)
    {
        std::istringstream is(text);
        std::string header;
        if (!std::getline(is, header) || header.rfind("# ", 0) != 0)
            throw std::invalid_argument("sequence_from_csv: missing header line");

        arma::uword G = 0, M_p = 0, n_d = 0;
        std::vector<arma::uword> g;
        std::istringstream hs(header.substr(2));
        std::string field;
        while (hs >> field)
        {
            const auto eq = field.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("sequence_from_csv: malformed header field '" + field + "'");
            const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
            if (key == "G")
                G = std::stoul(value);
            else if (key == "Mp")
                M_p = std::stoul(value);
            else if (key == "nd")
                n_d = std::stoul(value);
            else if (key == "g")
            {
                std::istringstream vs(value);
                std::string item;
                while (std::getline(vs, item, ','))
                    g.push_back(std::stoul(item));
            }
        }
        if (G == 0 || M_p == 0 || g.size() != n_d)
            throw std::invalid_argument("sequence_from_csv: incomplete header");

        ParsedSequence out;
        out.g = arma::uvec(g);
        out.seq.n_d = n_d;
        out.seq.c.set_size(G, M_p);
        std::string line;
        for (arma::uword q = 0; q < G; ++q)
        {
            if (!std::getline(is, line))
                throw std::invalid_argument("sequence_from_csv: expected " + std::to_string(G) + " rows");
            std::istringstream ls(line);
            std::string item;
            arma::uword j = 0;
            while (std::getline(ls, item, ','))
            {
                if (j >= M_p)
                    throw std::invalid_argument("sequence_from_csv: too many columns");
                out.seq.c(q, j++) = std::stoul(item);
            }
            if (j != M_p)
                throw std::invalid_argument("sequence_from_csv: too few columns");
        }
        return out;
    }

} // namespace pilotseq
