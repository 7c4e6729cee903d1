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

#ifndef LSFP_SCENARIO_HPP
#define LSFP_SCENARIO_HPP

#include <string>
#include <vector>

#include "lsfp/types.hpp"

namespace lsfp {

/// Network geometry: BS grid positions and per-cell UE drops, with the
/// derived distances and nominal angles for every (UE, BS) link.
struct Scenario {
    SystemConfig config;
    arma::mat bs_xy;    // L x 2
    arma::mat ue_xy;    // (L*K) x 2, UE (l,k) in row l*K+k
    arma::mat distance; // (L*K) x L  [m]
    arma::mat angle;    // (L*K) x L  [rad], bearing from BS to UE

    int ue_index(int l, int k) const { return l * config.ues_per_cell + k; }

    /// Plain-text dump (coordinates at full precision) for replaying a drop.
    std::string to_text() const;
    static Scenario from_text(const std::string& text);
};

/// Second-order statistics of one (UE, BS) link. h_bar carries the full
/// sqrt(beta*Kbar) scaling and R the beta*(1-Kbar) scaling, so
/// R_bar = R + h_bar*h_bar^H has trace beta*M.
struct ChannelStatistics {
    arma::cx_vec h_bar;
    arma::cx_mat R;
    arma::cx_mat R_bar;
    arma::cx_mat R_sqrt; // Hermitian square root of R, used for sampling
    double beta = 0.0;
    double k_factor = 0.0;
};

/// Statistics for all (l,k,j) links of a scenario.
class ChannelStatsSet {
  public:
    ChannelStatsSet() = default;
    ChannelStatsSet(int L, int K, int M) : L_(L), K_(K), M_(M), stats_(size_t(L) * K * L) {}

    ChannelStatistics& at(int l, int k, int j) { return stats_[index(l, k, j)]; }
    const ChannelStatistics& at(int l, int k, int j) const { return stats_[index(l, k, j)]; }

    int num_cells() const { return L_; }
    int ues_per_cell() const { return K_; }
    int num_antennas() const { return M_; }

  private:
    size_t index(int l, int k, int j) const { return (size_t(l) * K_ + k) * L_ + j; }
    int L_ = 0, K_ = 0, M_ = 0;
    std::vector<ChannelStatistics> stats_;
};

/// Distance-dependent large-scale gain, linear scale.
double large_scale_fading(double distance_m, double ref_db = -30.5, double slope_db = 36.7);

/// Distance-dependent Rician K-factor, linear scale.
double rician_factor(double distance_m, double exp0 = 1.3, double slope_per_m = 0.003);

inline double rician_kbar(double k_factor) { return k_factor / (k_factor + 1.0); }

/// Spatial correlation matrix of a half-wavelength ULA under the Gaussian
/// local scattering model (closed-form small-ASD kernel), trace-normalized
/// to M and eigenvalue-clipped to PSD.
arma::cx_mat build_correlation_matrix(double nominal_angle_rad, double asd_rad, int num_antennas);

/// Drops BSs on a regular grid and UEs uniformly in their cells, honoring the
/// minimum BS-UE distance. Deterministic in config.seed.
Scenario generate_network(const SystemConfig& config);

ChannelStatsSet build_channel_statistics(const Scenario& scenario);

} // namespace lsfp

#endif
