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

#ifndef LSFP_ESTIMATION_HPP
#define LSFP_ESTIMATION_HPP

#include <vector>

#include "lsfp/channels.hpp"
#include "lsfp/hardware.hpp"
#include "lsfp/scenario.hpp"

namespace lsfp {

/// Pilot-correlated observation y_jk at every (BS j, pilot index k).
struct PilotObservation {
    int L = 0, K = 0;
    std::vector<arma::cx_vec> y;

    PilotObservation() = default;
    PilotObservation(int L_, int K_) : L(L_), K(K_), y(size_t(L_) * K_) {}
    arma::cx_vec& at(int j, int k) { return y[size_t(j) * K + k]; }
    const arma::cx_vec& at(int j, int k) const { return y[size_t(j) * K + k]; }
};

/// Phase-unaware LMMSE channel estimator for the impaired uplink pilot chain:
/// UE DAC distortion, UE transmit EVM, BS receive EVM, AWGN and BS ADC
/// quantization, all in their Bussgang/EVM second-order form.
///
/// Precomputes, per (BS, pilot): the observation covariance C_yy, and per
/// link (l,k,j): the estimator gain G with h_hat = G*y_jk, plus the own-cell
/// error covariances. C_yy is the authoritative closed form; the Theorem-1
/// style estimate follows from the LMMSE rule h_hat = E[h y^H] C_yy^{-1} y.
class Estimator {
  public:
    Estimator(const ChannelStatsSet& stats, const BussgangMatrices& bussgang,
              const HardwareProfile& profile, const SystemConfig& config);

    const arma::cx_mat& cyy(int j, int k) const { return cyy_[size_t(j) * K_ + k]; }
    /// J^j = E[Wbar^j]: expected per-antenna received power at BS j (diagonal).
    const arma::vec& mean_input_power(int j) const { return j_diag_[j]; }
    /// Estimator gain of link (l,k,j): h_hat = gain * y_jk.
    const arma::cx_mat& gain(int l, int k, int j) const { return gain_[link(l, k, j)]; }
    /// Own-cell estimation error covariance C_lk of h_lk^l.
    const arma::cx_mat& error_cov(int l, int k) const { return cerr_[size_t(l) * K_ + k]; }
    /// Covariance of the own-cell estimate itself, R_bar - C_lk.
    const arma::cx_mat& estimate_cov(int l, int k) const { return cest_[size_t(l) * K_ + k]; }

    arma::cx_vec estimate(int l, int k, int j, const arma::cx_vec& y_jk) const {
        return gain_[link(l, k, j)] * y_jk;
    }

    /// Simulates the pilot phase for one channel realization, drawing every
    /// distortion term Gaussian with its conditional (Table-style) covariance.
    PilotObservation simulate_pilots(const ChannelGrid& h, Rng& rng) const;

    /// Per-antenna conditional received-power diagonal Wbar^j for a
    /// realization, including the pilot-sharing cross terms.
    arma::vec conditional_input_power(const ChannelGrid& h, int j) const;

    int num_cells() const { return L_; }
    int ues_per_cell() const { return K_; }
    int num_antennas() const { return M_; }

  private:
    size_t link(int l, int k, int j) const { return (size_t(l) * K_ + k) * L_ + j; }

    int L_, K_, M_;
    SystemConfig cfg_;
    double kappa_tu_, kappa_rb_;
    double alpha_d_; // UE DAC Bussgang gain
    arma::vec a_adc_, b_adc_;
    std::vector<arma::vec> j_diag_;
    std::vector<arma::cx_mat> cyy_;
    std::vector<arma::cx_mat> gain_;
    std::vector<arma::cx_mat> cerr_;
    std::vector<arma::cx_mat> cest_;
};

/// Free-function wrappers mirroring the operation-level API.
inline PilotObservation simulate_pilot_reception(const ChannelGrid& h, const Estimator& est,
                                                 Rng& rng) {
    return est.simulate_pilots(h, rng);
}

inline arma::cx_vec lmmse_estimate(const Estimator& est, int l, int k, int j,
                                   const arma::cx_vec& y_jk) {
    return est.estimate(l, k, j, y_jk);
}

} // namespace lsfp

#endif
