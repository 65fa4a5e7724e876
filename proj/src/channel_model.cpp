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

#include "pilotseq/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pilotseq
{
    namespace
    {
        constexpr double pi = std::numbers::pi;

        // Adaptive composite Simpson for int exp(-j c sin(xi)) dxi on [lo, hi].
        class OscillatorySimpson
        {
        public:
            OscillatorySimpson(double c, double abs_tol, std::size_t panel_budget)
                : c_(c), abs_tol_(abs_tol), panel_budget_(panel_budget) {}

            cx integrate(double lo, double hi)
            {
                struct Panel
                {
                    double a, b;
                    cx fa, fm, fb, whole;
                    double tol;
                };

                const double m = 0.5 * (lo + hi);
                const cx fa = f(lo), fm = f(m), fb = f(hi);

                // Seed with a fixed subdivision so highly oscillatory rows start resolved
                const std::size_t n_seed = std::max<std::size_t>(4, static_cast<std::size_t>(std::abs(c_) * (hi - lo) / pi) + 1);
                std::vector<Panel> stack;
                stack.reserve(256);
                const double width = (hi - lo) / double(n_seed);
                for (std::size_t i = 0; i < n_seed; ++i)
                {
                    const double a = lo + width * double(i);
                    const double b = (i + 1 == n_seed) ? hi : a + width;
                    const cx pa = (i == 0) ? fa : f(a);
                    const cx pb = (i + 1 == n_seed) ? fb : f(b);
                    const cx pm = f(0.5 * (a + b));
                    stack.push_back({a, b, pa, pm, pb, simpson(a, b, pa, pm, pb), abs_tol_ / double(n_seed)});
                }
                (void)fm;

                cx total = 0.0;
                std::size_t panels = 0;
                while (!stack.empty())
                {
                    Panel p = stack.back();
                    stack.pop_back();
                    if (++panels > panel_budget_)
                        throw std::runtime_error("one_ring_covariance: adaptive quadrature exceeded its panel budget");

                    const double mid = 0.5 * (p.a + p.b);
                    const double lm = 0.5 * (p.a + mid), rm = 0.5 * (mid + p.b);
                    const cx flm = f(lm), frm = f(rm);
                    const cx left = simpson(p.a, mid, p.fa, flm, p.fm);
                    const cx right = simpson(mid, p.b, p.fm, frm, p.fb);
                    const cx diff = left + right - p.whole;

                    if (std::abs(diff) <= 15.0 * p.tol || (p.b - p.a) < 1e-14)
                    {
                        total += left + right + diff / 15.0;
                        continue;
                    }
                    stack.push_back({p.a, mid, p.fa, flm, p.fm, left, 0.5 * p.tol});
                    stack.push_back({mid, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol});
                }
                return total;
            }

        private:
            cx f(double xi) const
            {
                const double phase = -c_ * std::sin(xi);
                return {std::cos(phase), std::sin(phase)};
            }

            static cx simpson(double a, double b, cx fa, cx fm, cx fb)
            {
                return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            }

            double c_;
            double abs_tol_;
            std::size_t panel_budget_;
        };

        arma::cx_mat toeplitz_from_first_column(const arma::cx_vec &col)
        {
            const arma::uword n = col.n_elem;
            arma::cx_mat r(n, n);
            for (arma::uword q = 0; q < n; ++q)
                for (arma::uword p = 0; p < n; ++p)
                    r(p, q) = (p >= q) ? col(p - q) : std::conj(col(q - p));
            return r;
        }

        std::vector<arma::uword> top_indices_descending(const arma::vec &values, arma::uword count)
        {
            std::vector<arma::uword> idx(values.n_elem);
            std::iota(idx.begin(), idx.end(), arma::uword(0));
            std::stable_sort(idx.begin(), idx.end(), [&](arma::uword x, arma::uword y)
                             { return values(x) > values(y); });
            idx.resize(count);
            return idx;
        }

        arma::vec projected_dft_power(const arma::cx_mat &r)
        {
            const arma::cx_mat f = dft_matrix(r.n_rows);
            const arma::cx_mat rf = r * f;
            arma::vec q(r.n_rows);
            for (arma::uword k = 0; k < r.n_rows; ++k)
                q(k) = std::max(0.0, std::real(arma::cdot(f.col(k), rf.col(k))));
            return q;
        }
    } // namespace

    ArrayGeometry ArrayGeometry::ula(arma::uword n_t, double spacing_over_wavelength)
    {
        ArrayGeometry g;
        g.kind = ArrayKind::ula;
        g.n_t = n_t;
        g.n_v = 1;
        g.n_h = n_t;
        g.spacing_over_wavelength = spacing_over_wavelength;
        g.validate();
        return g;
    }

    ArrayGeometry ArrayGeometry::upa(arma::uword n_v, arma::uword n_h, double spacing_over_wavelength)
    {
        ArrayGeometry g;
        g.kind = ArrayKind::upa;
        g.n_t = n_v * n_h;
        g.n_v = n_v;
        g.n_h = n_h;
        g.spacing_over_wavelength = spacing_over_wavelength;
        g.validate();
        return g;
    }

    void ArrayGeometry::validate() const
    {
        if (n_t < 1)
            throw std::invalid_argument("ArrayGeometry: n_t must be at least 1");
        if (kind == ArrayKind::upa && n_t != n_v * n_h)
            throw std::invalid_argument("ArrayGeometry: UPA requires n_t == n_v * n_h");
        if (!(spacing_over_wavelength > 0.0))
            throw std::invalid_argument("ArrayGeometry: spacing_over_wavelength must be positive");
    }

    void OneRingGeometry::validate() const
    {
        if (!(d_r >= 0.0) || !(d_s > d_r))
            throw std::invalid_argument("OneRingGeometry: requires d_s > d_r >= 0");
        if (!(h > 0.0) || !(d_0 > 0.0) || !(alpha_0 > 0.0))
            throw std::invalid_argument("OneRingGeometry: h, d_0 and alpha_0 must be positive");
        if (!(std::abs(theta_h) < pi / 3.0))
            throw std::invalid_argument("OneRingGeometry: theta_h must lie in (-pi/3, pi/3)");
        if (!(f_c > 0.0) || !(t_s > 0.0) || !(v >= 0.0))
            throw std::invalid_argument("OneRingGeometry: f_c, t_s must be positive and v non-negative");
    }

    double path_loss(const OneRingGeometry &geom)
    {
        return 1.0 / (1.0 + std::pow(geom.d_s / geom.d_0, geom.alpha_0));
    }

    OneRingAngles one_ring_params(const OneRingGeometry &geom)
    {
        const double upper = std::atan((geom.d_s + geom.d_r) / geom.h);
        const double lower = std::atan((geom.d_s - geom.d_r) / geom.h);
        return {0.5 * (upper - lower), 0.5 * (upper + lower), std::atan(geom.d_r / geom.d_s)};
    }

    arma::cx_mat one_ring_covariance(arma::uword n, double theta, double delta, double gain,
                                     double spacing_over_wavelength)
    {
        if (n == 0)
            throw std::invalid_argument("one_ring_covariance: n must be positive");
        if (delta < 0.0)
            throw std::invalid_argument("one_ring_covariance: delta must be non-negative");

        const double spacing_factor = 2.0 * spacing_over_wavelength;
        arma::cx_vec first_col(n);

        if (delta == 0.0)
        {
            for (arma::uword k = 0; k < n; ++k)
                first_col(k) = gain * std::polar(1.0, -pi * double(k) * spacing_factor * std::sin(theta));
            return toeplitz_from_first_column(first_col);
        }

        // Entry tolerance 1e-10, converted to the unnormalized integral
        const double abs_tol = 1e-10 * 2.0 * delta / std::max(1.0, gain);
        for (arma::uword k = 0; k < n; ++k)
        {
            if (k == 0)
            {
                first_col(0) = gain;
                continue;
            }
            OscillatorySimpson rule(pi * double(k) * spacing_factor, abs_tol, std::size_t(1) << 22);
            first_col(k) = gain / (2.0 * delta) * rule.integrate(theta - delta, theta + delta);
        }
        return toeplitz_from_first_column(first_col);
    }

    arma::cx_mat upa_covariance(const arma::cx_mat &r_h, const arma::cx_mat &r_v)
    {
        if (!r_h.is_square() || !r_v.is_square())
            throw std::invalid_argument("upa_covariance: axis covariances must be square");
        return arma::kron(r_h, r_v);
    }

    double bessel_j0(double x)
    {
        if (!(std::abs(x) < 5.0))
            throw std::domain_error("bessel_j0: argument outside the series range |x| < 5");
        const double q = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k)
        {
            term *= -q / (double(k) * double(k));
            sum += term;
            if (std::abs(term) < 1e-15)
                break;
        }
        return sum;
    }

    double doppler_frequency(const OneRingGeometry &geom)
    {
        return geom.v * geom.f_c / speed_of_light;
    }

    double temporal_coefficient(const OneRingGeometry &geom, arma::uword block_length)
    {
        if (geom.v < 0.0)
            throw std::invalid_argument("temporal_coefficient: speed must be non-negative");
        if (geom.v == 0.0)
            return 1.0;
        const double x = 2.0 * pi * doppler_frequency(geom) * geom.t_s * double(block_length);
        if (!(x < 2.404825557695773)) // first zero of J_0
            throw std::domain_error("temporal_coefficient: mobility too high, J_0 <= 0 for this block length");
        const double a = bessel_j0(x);
        if (!(a > 0.0))
            throw std::domain_error("temporal_coefficient: J_0 <= 0");
        return std::min(a, 1.0);
    }

    Eigensystem eigendecompose(const arma::cx_mat &r_h, double rank_tol)
    {
        if (!r_h.is_square() || r_h.n_rows == 0)
            throw std::invalid_argument("eigendecompose: covariance must be square and non-empty");

        arma::vec ev;
        arma::cx_mat vec;
        const arma::cx_mat sym = 0.5 * (r_h + r_h.t());
        if (!arma::eig_sym(ev, vec, sym))
            throw std::runtime_error("eigendecompose: eigen solver failed");

        // eig_sym returns ascending order
        const double lambda_1 = ev(ev.n_elem - 1);
        if (!(lambda_1 > 0.0))
            throw std::invalid_argument("eigendecompose: covariance has no positive eigenvalue");

        arma::uword r = 0;
        for (arma::uword i = ev.n_elem; i-- > 0;)
        {
            if (ev(i) > rank_tol * lambda_1)
                ++r;
            else
                break;
        }

        Eigensystem out;
        out.lambda.set_size(r);
        out.u.set_size(r_h.n_rows, r);
        for (arma::uword i = 0; i < r; ++i)
        {
            const arma::uword src = ev.n_elem - 1 - i;
            out.lambda(i) = ev(src);
            out.u.col(i) = vec.col(src);
        }
        return out;
    }

    ChannelStatistics make_statistics(double a, arma::cx_mat r_h, double rank_tol)
    {
        if (!(a >= 0.0 && a <= 1.0))
            throw std::invalid_argument("make_statistics: temporal coefficient must lie in [0, 1]");
        if (!r_h.is_square())
            throw std::invalid_argument("make_statistics: covariance must be square");

        const double scale = std::max(arma::abs(r_h).max(), 1e-300);
        if (arma::abs(r_h - r_h.t()).max() > 1e-12 * scale)
            throw std::invalid_argument("make_statistics: covariance is not Hermitian");

        Eigensystem es = eigendecompose(r_h, rank_tol);

        // PSD check on the full spectrum
        const arma::vec all_ev = arma::eig_sym(arma::cx_mat(0.5 * (r_h + r_h.t())));
        if (all_ev.min() < -1e-10 * es.lambda(0))
            throw std::invalid_argument("make_statistics: covariance is not positive semidefinite");

        ChannelStatistics s;
        s.a = a;
        s.r_h = std::move(r_h);
        s.u = std::move(es.u);
        s.lambda = std::move(es.lambda);
        return s;
    }

    arma::cx_mat one_ring_array_covariance(const ArrayGeometry &array, const OneRingGeometry &geom)
    {
        array.validate();
        geom.validate();
        const double gamma = path_loss(geom);
        const OneRingAngles ang = one_ring_params(geom);

        if (array.kind == ArrayKind::ula)
            return one_ring_covariance(array.n_t, geom.theta_h, ang.delta_h, gamma, array.spacing_over_wavelength);

        // The path loss enters once so that tr(R_h) = N_t gamma
        const arma::cx_mat r_h_axis = one_ring_covariance(array.n_h, geom.theta_h, ang.delta_h, gamma,
                                                          array.spacing_over_wavelength);
        const arma::cx_mat r_v_axis = one_ring_covariance(array.n_v, ang.theta_v, ang.delta_v, 1.0,
                                                          array.spacing_over_wavelength);
        return upa_covariance(r_h_axis, r_v_axis);
    }

    ChannelStatistics one_ring_statistics(const ArrayGeometry &array, const OneRingGeometry &geom,
                                          arma::uword block_length, double rank_tol)
    {
        const double a = temporal_coefficient(geom, block_length);
        return make_statistics(a, one_ring_array_covariance(array, geom), rank_tol);
    }

    arma::cx_mat dft_matrix(arma::uword n)
    {
        arma::cx_mat f(n, n);
        const double norm = 1.0 / std::sqrt(double(n));
        for (arma::uword k = 0; k < n; ++k)
            for (arma::uword m = 0; m < n; ++m)
                f(m, k) = std::polar(norm, -2.0 * pi * double((m * k) % n) / double(n));
        return f;
    }

    arma::cx_vec dft_column(arma::uword n, arma::uword k)
    {
        if (k >= n)
            throw std::out_of_range("dft_column: index out of range");
        arma::cx_vec f(n);
        const double norm = 1.0 / std::sqrt(double(n));
        for (arma::uword m = 0; m < n; ++m)
            f(m) = std::polar(norm, -2.0 * pi * double((m * k) % n) / double(n));
        return f;
    }

    DftBasis dft_approximation(const arma::cx_mat &r_h, arma::uword r_target)
    {
        if (!r_h.is_square())
            throw std::invalid_argument("dft_approximation: covariance must be square");
        if (r_target == 0 || r_target > r_h.n_rows)
            throw std::invalid_argument("dft_approximation: r_target must lie in [1, N_t]");

        const arma::vec q = projected_dft_power(r_h);
        const auto idx = top_indices_descending(q, r_target);

        DftBasis out;
        out.f_tilde.set_size(r_h.n_rows, r_target);
        out.lambda_tilde.set_size(r_target);
        out.column_indices.set_size(r_target);
        for (arma::uword i = 0; i < r_target; ++i)
        {
            out.f_tilde.col(i) = dft_column(r_h.n_rows, idx[i]);
            out.lambda_tilde(i) = q(idx[i]);
            out.column_indices(i) = idx[i];
        }
        return out;
    }

    DftBasis dft_approximation_upa(const arma::cx_mat &r_h_axis, const arma::cx_mat &r_v_axis,
                                   arma::uword r_target)
    {
        if (!r_h_axis.is_square() || !r_v_axis.is_square())
            throw std::invalid_argument("dft_approximation_upa: axis covariances must be square");
        const arma::uword n_h = r_h_axis.n_rows, n_v = r_v_axis.n_rows;
        if (r_target == 0 || r_target > n_h * n_v)
            throw std::invalid_argument("dft_approximation_upa: r_target must lie in [1, N_t]");

        const arma::vec q_h = projected_dft_power(r_h_axis);
        const arma::vec q_v = projected_dft_power(r_v_axis);
        arma::vec q(n_h * n_v);
        for (arma::uword kh = 0; kh < n_h; ++kh)
            for (arma::uword kv = 0; kv < n_v; ++kv)
                q(kh * n_v + kv) = q_h(kh) * q_v(kv);

        const auto idx = top_indices_descending(q, r_target);

        DftBasis out;
        out.f_tilde.set_size(n_h * n_v, r_target);
        out.lambda_tilde.set_size(r_target);
        out.column_indices.set_size(r_target);
        for (arma::uword i = 0; i < r_target; ++i)
        {
            const arma::uword kh = idx[i] / n_v, kv = idx[i] % n_v;
            out.f_tilde.col(i) = arma::kron(dft_column(n_h, kh), dft_column(n_v, kv));
            out.lambda_tilde(i) = q(idx[i]);
            out.column_indices(i) = idx[i];
        }
        return out;
    }

    double dft_residual(const arma::cx_mat &r_h, const DftBasis &basis)
    {
        const arma::cx_mat approx = basis.f_tilde * arma::diagmat(arma::conv_to<arma::cx_vec>::from(basis.lambda_tilde)) *
                                    basis.f_tilde.t();
        return arma::norm(r_h - approx, "fro") / arma::norm(r_h, "fro");
    }

    arma::cx_vec complex_normal(arma::uword n, Rng &rng)
    {
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        arma::cx_vec out(n);
        for (arma::uword i = 0; i < n; ++i)
        {
            const double re = nd(rng);
            const double im = nd(rng);
            out(i) = cx(re, im);
        }
        return out;
    }

    arma::cx_vec draw_channel(const ChannelStatistics &stats, Rng &rng)
    {
        const arma::cx_vec b = complex_normal(stats.rank(), rng);
        return stats.u * (arma::conv_to<arma::cx_vec>::from(arma::sqrt(stats.lambda)) % b);
    }

    arma::cx_vec evolve_channel(const arma::cx_vec &h_prev, const ChannelStatistics &stats, Rng &rng)
    {
        const arma::cx_vec b = complex_normal(stats.rank(), rng);
        const arma::cx_vec innovation = stats.u * (arma::conv_to<arma::cx_vec>::from(arma::sqrt(stats.lambda)) % b);
        return stats.a * h_prev + std::sqrt(1.0 - stats.a * stats.a) * innovation;
    }

} // namespace pilotseq
