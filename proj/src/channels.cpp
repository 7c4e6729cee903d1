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

#include "lsfp/channels.hpp"

#include "lsfp/scenario.hpp"

namespace lsfp {

arma::cx_vec steering_vector(double theta_rad, int num_antennas) {
    if (num_antennas < 1)
        throw std::invalid_argument("steering_vector: M must be >= 1");
    arma::cx_vec a(num_antennas);
    const double s = std::sin(theta_rad);
    for (int m = 0; m < num_antennas; ++m)
        a(m) = std::polar(1.0, arma::datum::pi * m * s);
    return a;
}

ChannelRealization sample_channel(const ChannelStatistics& stats, Rng& rng) {
    ChannelRealization out;
    out.phase = rng.uniform(-arma::datum::pi, arma::datum::pi);
    const arma::cx_vec w = rng.cgaussian_vec(stats.h_bar.n_elem);
    out.h = stats.h_bar * std::polar(1.0, out.phase) + stats.R_sqrt * w;
    return out;
}

} // namespace lsfp
