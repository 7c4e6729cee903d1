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

#ifndef LSFP_RNG_HPP
#define LSFP_RNG_HPP

#include <armadillo>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lsfp {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Mixes a base seed with a list of stream identifiers into an independent
/// substream seed. Used to give every (module, realization, link) its own
/// stream so Monte-Carlo results do not depend on evaluation order.
inline std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = seed;
    (void)splitmix64_next(s);
    for (std::uint64_t id : ids) {
        s ^= id + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
        (void)splitmix64_next(s);
    }
    return splitmix64_next(s);
}

/// Deterministic random source. Gaussian variates use Box-Muller on top of
/// mt19937_64 so sequences are identical across standard libraries (the
/// distributions in <random> are implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * arma::datum::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian, unit variance per sample
    /// (variance 1/2 per real component).
    std::complex<double> cgaussian() {
        const double s = 1.0 / std::sqrt(2.0);
        const double re = gaussian();
        const double im = gaussian();
        return {s * re, s * im};
    }

    arma::cx_vec cgaussian_vec(arma::uword n) {
        arma::cx_vec v(n);
        for (arma::uword i = 0; i < n; ++i)
            v(i) = cgaussian();
        return v;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    return Rng(derive_stream(seed, ids));
}

// Stream domain tags; keep values stable, they are part of the seeded
// reproducibility contract.
namespace stream_tag {
constexpr std::uint64_t kScenario = 0x5ce0;
constexpr std::uint64_t kChannel = 0xc4a7;
constexpr std::uint64_t kPilotNoise = 0x914d;
constexpr std::uint64_t kDownlink = 0xd011;
constexpr std::uint64_t kValidation = 0x7e57;
} // namespace stream_tag

} // namespace lsfp

#endif
