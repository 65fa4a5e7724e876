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

#include <armadillo>
#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace pilotseq
{
    using cx = std::complex<double>;
    using Rng = std::mt19937_64;

    enum class ArrayKind
    {
        ula,
        upa
    };

    // Base station antenna array. For a UPA the element index runs vertically fastest,
    // i.e. element (h, v) sits at position h * n_v + v, matching kron(R_H, R_V).
    struct ArrayGeometry
    {
        ArrayKind kind = ArrayKind::ula;
        arma::uword n_t = 32;
        arma::uword n_v = 1;
        arma::uword n_h = 32;
        double spacing_over_wavelength = 0.5;

        static ArrayGeometry ula(arma::uword n_t, double spacing_over_wavelength = 0.5);
        static ArrayGeometry upa(arma::uword n_v, arma::uword n_h, double spacing_over_wavelength = 0.5);

        void validate() const; // throws std::invalid_argument
    };

    // One-ring scattering geometry plus the mobility parameters needed for the temporal model.
    struct OneRingGeometry
    {
        double d_s = 100.0;           // BS-user distance [m]
        double d_r = 30.0;            // scattering ring radius [m]
        double h = 60.0;              // BS elevation [m]
        double d_0 = 30.0;            // path-loss reference distance [m]
        double alpha_0 = 3.8;         // path-loss exponent
        double theta_h = 0.0;         // horizontal angle of arrival [rad]
        double f_c = 2.5e9;           // carrier frequency [Hz]
        double t_s = 100e-6;          // symbol duration [s]
        double v = 3.0 / 3.6;         // user speed [m/s]

        void validate() const; // throws std::invalid_argument
    };

    struct OneRingAngles
    {
        double delta_v; // vertical angular spread [rad]
        double theta_v; // vertical mean angle [rad]
        double delta_h; // horizontal angular spread [rad]
    };

    // Eigensystem of a Hermitian PSD covariance, truncated to its effective rank.
    struct Eigensystem
    {
        arma::cx_mat u;    // N_t x r, orthonormal columns
        arma::vec lambda;  // r eigenvalues, descending, strictly positive
        arma::uword rank() const { return lambda.n_elem; }
    };

    // Temporal and spatial channel statistics (a, R_h) with the truncated eigensystem of R_h.
    struct ChannelStatistics
    {
        double a = 1.0;
        arma::cx_mat r_h;
        arma::cx_mat u;
        arma::vec lambda;

        arma::uword n_t() const { return r_h.n_rows; }
        arma::uword rank() const { return lambda.n_elem; }
    };

    // Columns of the unitary DFT matrix approximating the covariance eigenbasis.
    struct DftBasis
    {
        arma::cx_mat f_tilde;        // N_t x r, orthonormal DFT columns
        arma::vec lambda_tilde;      // f^H R f for each selected column, descending
        arma::uvec column_indices;   // DFT column index of each selected column
    };

    inline constexpr double speed_of_light = 3.0e8;
    inline constexpr double default_rank_tol = 1e-6;

    double path_loss(const OneRingGeometry &geom);
    OneRingAngles one_ring_params(const OneRingGeometry &geom);

    // Toeplitz one-ring covariance of an n-element uniform linear axis. Entry (p,q) is
    // gain / (2 delta) * int_{theta-delta}^{theta+delta} exp(-j pi (p-q) 2 (d/lambda) sin(xi)) dxi.
    // delta == 0 yields the steering-vector outer product scaled by gain.
    arma::cx_mat one_ring_covariance(arma::uword n, double theta, double delta, double gain,
                                     double spacing_over_wavelength = 0.5);

    // kron(R_H, R_V); throws when either factor is not square.
    arma::cx_mat upa_covariance(const arma::cx_mat &r_h, const arma::cx_mat &r_v);

    // J_0 by its power series; valid for |x| < 5.
    double bessel_j0(double x);
    double doppler_frequency(const OneRingGeometry &geom);

    // Jakes coefficient a = J_0(2 pi f_D T_s M). Throws std::domain_error if J_0 <= 0.
    double temporal_coefficient(const OneRingGeometry &geom, arma::uword block_length);

    // Keeps eigenvalues above rank_tol * lambda_1. Throws on a zero matrix.
    Eigensystem eigendecompose(const arma::cx_mat &r_h, double rank_tol = default_rank_tol);

    ChannelStatistics make_statistics(double a, arma::cx_mat r_h, double rank_tol = default_rank_tol);

    // Spatial covariance of the one-ring model for the given array (path loss applied once).
    arma::cx_mat one_ring_array_covariance(const ArrayGeometry &array, const OneRingGeometry &geom);

    ChannelStatistics one_ring_statistics(const ArrayGeometry &array, const OneRingGeometry &geom,
                                          arma::uword block_length, double rank_tol = default_rank_tol);

    // Unitary DFT matrix, [W]_{n,k} = exp(-j 2 pi n k / N) / sqrt(N).
    arma::cx_mat dft_matrix(arma::uword n);
    arma::cx_vec dft_column(arma::uword n, arma::uword k);

    // Selects the r_target DFT columns with the largest projected power f_k^H R f_k.
    DftBasis dft_approximation(const arma::cx_mat &r_h, arma::uword r_target);

    // Per-axis variant for R = kron(R_H, R_V): candidate columns are kron(f_H, f_V) with
    // projected power (f_H^H R_H f_H) (f_V^H R_V f_V).
    DftBasis dft_approximation_upa(const arma::cx_mat &r_h_axis, const arma::cx_mat &r_v_axis,
                                   arma::uword r_target);

    // Relative Frobenius error of R against F diag(lambda) F^H.
    double dft_residual(const arma::cx_mat &r_h, const DftBasis &basis);

    // i.i.d. CN(0,1) entries, real and imaginary parts each with variance 1/2.
    arma::cx_vec complex_normal(arma::uword n, Rng &rng);

    // Stationary draw h ~ CN(0, R_h) through the eigensystem.
    arma::cx_vec draw_channel(const ChannelStatistics &stats, Rng &rng);

    // Gauss-Markov step h' = a h + sqrt(1 - a^2) U diag(lambda)^{1/2} b.
    arma::cx_vec evolve_channel(const arma::cx_vec &h_prev, const ChannelStatistics &stats, Rng &rng);

} // namespace pilotseq
