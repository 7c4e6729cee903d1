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

#ifndef LSFP_PRECODING_HPP
#define LSFP_PRECODING_HPP

#include <string>
#include <vector>

#include "lsfp/estimation.hpp"

namespace lsfp {

enum class PrecoderKind { kMr, kDuMmse, kDaMmse };

std::string to_string(PrecoderKind kind);
PrecoderKind precoder_from_string(const std::string& name);

/// Precoders of one BS for one realization: unit-mean-square-normalized
/// columns w_lk = omega_lk * v_lk.
struct PrecoderSet {
    PrecoderKind kind = PrecoderKind::kMr;
    arma::cx_mat w;  // M x K
    arma::vec omega; // K
};

/// Builds local precoder directions per BS from the own-cell channel
/// estimates. MR returns the estimate itself; DU-MMSE solves the
/// estimate-plus-statistics regularized system; DA-MMSE additionally folds in
/// the Bussgang/EVM distortion statistics of the BS receive chain, which is
/// the uplink form that the downlink precoder inherits through duality.
class LocalPrecoder {
  public:
    LocalPrecoder(PrecoderKind kind, const ChannelStatsSet& stats, const Estimator& estimator,
                  const BussgangMatrices& bussgang, const HardwareProfile& profile,
                  const SystemConfig& config);

    /// Unnormalized direction columns for BS l; h_hat_cols holds the own-cell
    /// estimates [h_hat_l1, ..., h_hat_lK].
    arma::cx_mat directions(int l, const arma::cx_mat& h_hat_cols) const;

    PrecoderKind kind() const { return kind_; }

  private:
    PrecoderKind kind_;
    int L_, K_, M_;
    double sigma2_, pilot_power_;
    double alpha_d_tilde_; // alpha_d * (1 + kappa_tu^2)
    double kappa_rb_;
    arma::vec a_adc_;
    arma::vec dist_coef_;              // kappa_rb^2 A^2 + B(1+kappa_rb^2), per antenna
    std::vector<arma::cx_mat> base_;   // per BS: realization-independent part
    std::vector<arma::vec> wbar_base_; // per BS: statistics part of W_hat diag
};

/// omega = 1/sqrt(mean ||v||^2) over the realization set.
double normalize_precoders(const std::vector<double>& norm_sq_samples);

} // namespace lsfp

#endif
