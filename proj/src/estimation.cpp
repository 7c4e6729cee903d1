// SPDX-License-Identifier: Apache-2.0
//
// lsfp-sim: downlink simulator and LSFP weight optimizer for hardware-impaired
// multi-cell massive MIMO with spatially correlated Rician fading
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

#include "lsfp/estimation.hpp"

#include "lsfp/linalg.hpp"

namespace lsfp {

namespace {

// A X A for diagonal A given as a real vector: scales rows and columns.
arma::cx_mat diag_sandwich(const arma::vec& a, const arma::cx_mat& x) {
    arma::cx_mat out = x;
    out.each_col() %= arma::cx_vec(a, arma::vec(a.n_elem, arma::fill::zeros));
    out.each_row() %= arma::cx_rowvec(a.t(), arma::rowvec(a.n_elem, arma::fill::zeros));
    return out;
}

} // namespace

Estimator::Estimator(const ChannelStatsSet& stats, const BussgangMatrices& bussgang,
                     const HardwareProfile& profile, const SystemConfig& config)
    : L_(stats.num_cells()), K_(stats.ues_per_cell()), M_(stats.num_antennas()), cfg_(config),
      kappa_tu_(profile.kappa_tu), kappa_rb_(profile.kappa_rb), alpha_d_(bussgang.alpha_d_ue),
      a_adc_(bussgang.a_adc), b_adc_(bussgang.b_adc) {
    cfg_.validate();
    const double tau_p = cfg_.pilot_len;
    const double p = cfg_.pilot_power_w;
    const double sigma2 = cfg_.noise_power_w;

    // J^j = E[Wbar^j]; the pilot-sharing cross terms vanish in expectation
    // because the LoS phases are independent and uniform.
    j_diag_.resize(L_);
    for (int j = 0; j < L_; ++j) {
        arma::vec acc(M_, arma::fill::zeros);
        for (int l = 0; l < L_; ++l)
            for (int k = 0; k < K_; ++k)
                acc += (1.0 + kappa_tu_ * kappa_tu_) * alpha_d_ * p *
                       arma::real(stats.at(l, k, j).R_bar.diag());
        j_diag_[j] = acc;
    }

    cyy_.resize(size_t(L_) * K_);
    gain_.resize(size_t(L_) * K_ * L_);
    cerr_.resize(size_t(L_) * K_);
    cest_.resize(size_t(L_) * K_);

    const double pilot_amp = alpha_d_ * std::sqrt(p) * tau_p; // scales E[h y^H]
    for (int j = 0; j < L_; ++j) {
        for (int k = 0; k < K_; ++k) {
            arma::cx_mat cyy(M_, M_, arma::fill::zeros);
            // coherent pilot part, one term per pilot-sharing UE
            for (int l = 0; l < L_; ++l)
                cyy += alpha_d_ * alpha_d_ * p * tau_p * tau_p *
                       diag_sandwich(a_adc_, stats.at(l, k, j).R_bar);
            // UE DAC quantization plus UE transmit EVM, all UEs
            for (int l = 0; l < L_; ++l)
                for (int kk = 0; kk < K_; ++kk)
                    cyy += tau_p * alpha_d_ * (1.0 - alpha_d_ + kappa_tu_ * kappa_tu_) * p *
                           diag_sandwich(a_adc_, stats.at(l, kk, j).R_bar);
            // BS receive EVM, AWGN through the ADC gain, ADC quantization
            arma::vec diag_part = tau_p * kappa_rb_ * kappa_rb_ * (a_adc_ % a_adc_ % j_diag_[j]) +
                                  sigma2 * tau_p * (a_adc_ % a_adc_) +
                                  tau_p * b_adc_ %
                                      ((1.0 + kappa_rb_ * kappa_rb_) * j_diag_[j] +
                                       sigma2 * arma::vec(M_, arma::fill::ones));
            cyy.diag() += arma::cx_vec(diag_part, arma::vec(M_, arma::fill::zeros));
            cyy_[size_t(j) * K_ + k] = cyy;

            arma::cx_mat cyy_inv;
            if (!arma::inv_sympd(cyy_inv, cyy))
                throw std::runtime_error("Estimator: pilot observation covariance is singular");

            for (int l = 0; l < L_; ++l) {
                // E[h y^H] = alpha_d sqrt(p) tau_p R_bar A_a ; gain = E[h y^H] C_yy^{-1}
                arma::cx_mat cross = pilot_amp * stats.at(l, k, j).R_bar;
                cross.each_row() %=
                    arma::cx_rowvec(a_adc_.t(), arma::rowvec(M_, arma::fill::zeros));
                gain_[link(l, k, j)] = cross * cyy_inv;
                if (j == l) {
                    const arma::cx_mat est_cov = gain_[link(l, k, j)] * cross.t();
                    cest_[size_t(l) * K_ + k] = 0.5 * (est_cov + est_cov.t());
                    cerr_[size_t(l) * K_ + k] =
                        stats.at(l, k, j).R_bar - cest_[size_t(l) * K_ + k];
                }
            }
        }
    }
}

arma::vec Estimator::conditional_input_power(const ChannelGrid& h, int j) const {
    const double p = cfg_.pilot_power_w;
    arma::vec w(M_, arma::fill::zeros);
    for (int l = 0; l < L_; ++l)
        for (int k = 0; k < K_; ++k)
            w += (1.0 + kappa_tu_ * kappa_tu_) * alpha_d_ * p *
                 arma::square(arma::abs(h.at(l, k, j)));
    // pilot-sharing UEs add cross terms; each unordered pair appears twice
    // conjugated, hence the 2 Re(.)
    for (int k = 0; k < K_; ++k)
        for (int l = 0; l < L_; ++l)
            for (int m = l + 1; m < L_; ++m)
                w += 2.0 * alpha_d_ * alpha_d_ * p *
                     arma::real(h.at(l, k, j) % arma::conj(h.at(m, k, j)));
    return w;
}

PilotObservation Estimator::simulate_pilots(const ChannelGrid& h, Rng& rng) const {
    if (h.num_cells() != L_ || h.ues_per_cell() != K_)
        throw std::invalid_argument("simulate_pilots: channel grid dimensions mismatch");
    const double tau_p = cfg_.pilot_len;
    const double p = cfg_.pilot_power_w;
    const double sigma2 = cfg_.noise_power_w;

    // Per-UE scalar distortions after pilot correlation; shared by all BSs,
    // independent across pilot indices.
    arma::cx_mat ue_noise(size_t(L_) * K_, K_);
    const double dac_std = std::sqrt(tau_p * (1.0 - alpha_d_) * alpha_d_ * p);
    const double tu_std = std::sqrt(tau_p * kappa_tu_ * kappa_tu_ * alpha_d_ * p);
    for (int u = 0; u < L_ * K_; ++u)
        for (int k = 0; k < K_; ++k)
            ue_noise(u, k) = dac_std * rng.cgaussian() + tu_std * rng.cgaussian();

    PilotObservation obs(L_, K_);
    for (int j = 0; j < L_; ++j) {
        const arma::vec wbar = conditional_input_power(h, j);
        const arma::vec rb_std = arma::sqrt(tau_p * kappa_rb_ * kappa_rb_ * wbar);
        const arma::vec adc_std = arma::sqrt(
            tau_p * b_adc_ %
            ((1.0 + kappa_rb_ * kappa_rb_) * wbar + sigma2 * arma::vec(M_, arma::fill::ones)));
        for (int k = 0; k < K_; ++k) {
            arma::cx_vec y(M_, arma::fill::zeros);
            for (int l = 0; l < L_; ++l)
                y += alpha_d_ * std::sqrt(p) * tau_p * h.at(l, k, j);
            for (int l = 0; l < L_; ++l)
                for (int kk = 0; kk < K_; ++kk)
                    y += h.at(l, kk, j) * ue_noise(size_t(l) * K_ + kk, k);
            y += rb_std % rng.cgaussian_vec(M_);
            y += std::sqrt(tau_p * sigma2) * rng.cgaussian_vec(M_);
            y %= arma::cx_vec(a_adc_, arma::vec(M_, arma::fill::zeros));
            y += adc_std % rng.cgaussian_vec(M_);
            obs.at(j, k) = y;
        }
    }
    return obs;
}

} // namespace lsfp
