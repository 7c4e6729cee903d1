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

#ifndef LSFP_CHANNELS_HPP
#define LSFP_CHANNELS_HPP

#include <armadillo>
#include <vector>

#include "lsfp/rng.hpp"

namespace lsfp {

struct ChannelStatistics;

/// Half-wavelength ULA steering vector, a_m = exp(i*pi*(m-1)*sin(theta)).
arma::cx_vec steering_vector(double theta_rad, int num_antennas);

struct ChannelRealization {
    arma::cx_vec h;
    double phase = 0.0; // LoS phase, in [-pi, pi)
};

/// One draw of h = h_bar*exp(i*phi) + R^(1/2)*w with phi ~ U[-pi,pi) and
/// w circularly-symmetric Gaussian.
ChannelRealization sample_channel(const ChannelStatistics& stats, Rng& rng);

/// Channel vectors of every (UE l,k -> BS j) link for one coherence block.
class ChannelGrid {
  public:
    ChannelGrid() = default;
    ChannelGrid(int L, int K) : L_(L), K_(K), h_(size_t(L) * K * L) {}

    arma::cx_vec& at(int l, int k, int j) { return h_[index(l, k, j)]; }
    const arma::cx_vec& at(int l, int k, int j) const { return h_[index(l, k, j)]; }

    int num_cells() const { return L_; }
    int ues_per_cell() const { return K_; }

  private:
    size_t index(int l, int k, int j) const { return (size_t(l) * K_ + k) * L_ + j; }
    int L_ = 0, K_ = 0;
    std::vector<arma::cx_vec> h_;
};

} // namespace lsfp

#endif
