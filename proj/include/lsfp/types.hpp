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

#ifndef LSFP_TYPES_HPP
#define LSFP_TYPES_HPP

#include <armadillo>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace lsfp {

using cx_double = std::complex<double>;

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double deg_to_rad(double deg) { return deg * arma::datum::pi / 180.0; }

/// System-level dimensions, powers and large-scale model parameters.
/// Powers are in watts, distances in meters, angles in radians.
struct SystemConfig {
    int num_cells = 4;       // L
    int ues_per_cell = 5;    // K
    int num_antennas = 100;  // M per BS
    int pilot_len = 5;       // tau_p (symbols)
    int coherence_len = 200; // tau_c (symbols)

    double pilot_power_w = dbm_to_watt(23.0);   // p~ per UE
    double downlink_power_w = 1.0;              // rho_d per BS
    double noise_power_w = dbm_to_watt(-96.0);  // sigma^2

    double area_side_m = 1000.0;
    double min_bs_ue_dist_m = 35.0;
    double asd_rad = deg_to_rad(30.0);

    // Distance models: beta_dB = pathloss_ref_db - pathloss_slope_db*log10(d)
    // and K = 10^(rician_exp0 - rician_slope_per_m*d). Overridable stand-ins
    // for the externally referenced urban models.
    double pathloss_ref_db = -30.5;
    double pathloss_slope_db = 36.7;
    double rician_exp0 = 1.3;
    double rician_slope_per_m = 0.003;

    std::uint64_t seed = 1;

    int total_ues() const { return num_cells * ues_per_cell; }

    void validate() const {
        if (num_cells < 1 || ues_per_cell < 1 || num_antennas < 1)
            throw std::invalid_argument("L, K and M must all be >= 1");
        if (pilot_len < ues_per_cell)
            throw std::invalid_argument("pilot length tau_p must be >= K");
        if (coherence_len <= pilot_len)
            throw std::invalid_argument("coherence block tau_c must exceed tau_p");
        if (pilot_power_w <= 0.0 || downlink_power_w <= 0.0 || noise_power_w <= 0.0)
            throw std::invalid_argument("all powers must be positive");
        if (area_side_m <= 0.0 || min_bs_ue_dist_m < 0.0)
            throw std::invalid_argument("invalid geometry parameters");
        if (asd_rad < 0.0)
            throw std::invalid_argument("angular standard deviation must be >= 0");
    }
};

} // namespace lsfp

#endif
