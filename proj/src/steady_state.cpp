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


#include "pilotseq/steady_state.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace pilotseq
{
    namespace
    {
        // Returns (a^{2n}, 1 - a^{2n}) with the complement computed without cancellation.
        std::pair<double, double> power_and_complement(double a, unsigned long n)
        {
            if (n == 0)
                return {1.0, 0.0};
            if (a == 0.0)
                return {0.0, 1.0};
            const double e = 2.0 * double(n) * std::log(a);
            return {std::exp(e), -std::expm1(e)};
        }

        void check_inputs(double lambda, double a, double rho)
        {
            if (!(lambda > 0.0))
                throw std::invalid_argument("steady state: eigenvalue must be positive");
            if (!(a >= 0.0 && a <= 1.0))
                throw std::invalid_argument("steady state: temporal coefficient must lie in [0, 1]");
            if (!(rho >= 0.0))
                throw std::invalid_argument("steady state: training power must be non-negative");
        }
    } // namespace

    double min_ss_mse(double lambda, double a, double rho, unsigned long g)
    {
        check_inputs(lambda, a, rho);
        if (g < 1)
            throw std::invalid_argument("min_ss_mse: interval must be at least 1");
        if (rho == 0.0)
            return lambda;
        if (a == 1.0)
            return 0.0;

        const auto [pw, comp] = power_and_complement(a, g);
        const double ratio = pw / comp;
        const double half = 0.5 * (1.0 + lambda * rho);
        return lambda / (half + std::sqrt(half * half + ratio * lambda * rho));
    }

    double max_ss_mse(double lambda_lower, double lambda, double a, unsigned long g)
    {
        if (g < 1)
            throw std::invalid_argument("max_ss_mse: interval must be at least 1");
        const auto [pw, comp] = power_and_complement(a, g - 1);
        return pw * lambda_lower + comp * lambda;
    }

    SteadyStateProfile profile(const arma::vec &lambda, double a, double rho, const arma::uvec &g)
    {
        if (lambda.n_elem != g.n_elem)
            throw std::invalid_argument("profile: lambda and g must have equal length");
        SteadyStateProfile p;
        p.lambda = lambda;
        p.g = g;
        p.a = a;
        p.lambda_lower = lambda;
        p.lambda_upper = lambda;
        p.n_d = 0;
        for (arma::uword i = 0; i < lambda.n_elem; ++i)
        {
            if (g(i) == 0)
                continue;
            ++p.n_d;
            p.lambda_lower(i) = min_ss_mse(lambda(i), a, rho, g(i));
            p.lambda_upper(i) = max_ss_mse(p.lambda_lower(i), lambda(i), a, g(i));
        }
        return p;
    }

    double bound_gap(const SteadyStateProfile &p)
    {
        double gap = 0.0;
        for (arma::uword i = 0; i < p.g.n_elem; ++i)
        {
            if (p.g(i) == 0)
                continue;
            const double comp = power_and_complement(p.a, p.g(i) - 1).second;
            gap += comp * (p.lambda(i) - p.lambda_lower(i));
        }
        return gap;
    }

    OracleResult riccati_iterate_oracle(double lambda, double a, double rho, unsigned long g,
                                        double tol, unsigned long max_iter)
    {
        check_inputs(lambda, a, rho);
        if (!(tol > 0.0))
            throw std::invalid_argument("riccati_iterate_oracle: tol must be positive");
        if (g < 1)
            throw std::invalid_argument("riccati_iterate_oracle: interval must be at least 1");

        const auto [pw, comp] = power_and_complement(a, g);
        double x = lambda;
        double prev_step = -1.0;
        for (unsigned long it = 1; it <= max_iter; ++it)
        {
            const double pred = pw * x + comp * lambda;
            const double next = pred / (rho * pred + 1.0);
            const double step = std::abs(next - x);
            x = next;
            if (step == 0.0)
                return {x, it};
            if (prev_step > 0.0)
            {
                const double k = step / prev_step;
                if (k < 1.0 && step * k / (1.0 - k) < tol)
                    return {x, it};
            }
            else if (pw == 0.0)
                return {x, it};
            prev_step = step;
        }
        throw std::runtime_error("riccati_iterate_oracle: iteration budget exhausted");
    }

} // namespace pilotseq
