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

#include "lsfp/hardware.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace lsfp {

namespace {

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * arma::datum::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse standard normal CDF by bisection; only used once per codebook for
// the percentile initialization, so speed is irrelevant.
double normal_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

LloydMaxCodebook design_codebook(int bits) {
    const int n = 1 << bits;
    arma::vec c(n);
    for (int i = 0; i < n; ++i)
        c(i) = normal_quantile((i + 0.5) / n);

    arma::vec t(n - 1);
    constexpr double kTol = 1e-12;
    constexpr int kMaxIters = 20000;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        for (int i = 0; i + 1 < n; ++i)
            t(i) = 0.5 * (c(i) + c(i + 1));
        double move = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = (i == 0) ? -arma::datum::inf : t(i - 1);
            const double b = (i == n - 1) ? arma::datum::inf : t(i);
            const double pa = std::isinf(a) ? 0.0 : normal_pdf(a);
            const double pb = std::isinf(b) ? 0.0 : normal_pdf(b);
            const double mass = normal_cdf(b) - normal_cdf(a);
            const double cn = (pa - pb) / std::max(mass, 1e-300);
            move = std::max(move, std::abs(cn - c(i)));
            c(i) = cn;
        }
        if (move < kTol)
            break;
    }
    for (int i = 0; i + 1 < n; ++i)
        t(i) = 0.5 * (c(i) + c(i + 1));

    // At a Lloyd fixed point E[q x] = E[q^2], so the MSE for unit-variance
    // input is 1 - sum_i p_i c_i^2.
    double second_moment = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = (i == 0) ? -arma::datum::inf : t(i - 1);
        const double b = (i == n - 1) ? arma::datum::inf : t(i);
        second_moment += (normal_cdf(b) - normal_cdf(a)) * c(i) * c(i);
    }

    LloydMaxCodebook cb;
    cb.bits = bits;
    cb.levels = c;
    cb.thresholds = t;
    cb.rho = 1.0 - second_moment;
    return cb;
}

std::array<LloydMaxCodebook, kMaxBits + 1>& codebook_cache() {
    static std::array<LloydMaxCodebook, kMaxBits + 1> cache;
    return cache;
}

std::mutex& codebook_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

const LloydMaxCodebook& lloyd_max_codebook(int bits) {
    if (bits < 1 || bits > kMaxBits)
        throw std::domain_error("lloyd_max_codebook: resolution must be in 1.." +
                                std::to_string(kMaxBits) + " bits");
    std::lock_guard<std::mutex> lock(codebook_mutex());
    LloydMaxCodebook& slot = codebook_cache()[bits];
    if (slot.bits == 0)
        slot = design_codebook(bits);
    return slot;
}

double distortion_factor(int bits) {
    if (bits == kIdealBits)
        return 0.0;
    return lloyd_max_codebook(bits).rho;
}

double bussgang_gain(int bits) { return 1.0 - distortion_factor(bits); }

double lloyd_max_quantize(double x, int bits) {
    if (bits == kIdealBits)
        return x;
    const LloydMaxCodebook& cb = lloyd_max_codebook(bits);
    const arma::vec& t = cb.thresholds;
    // Cell index = number of thresholds <= x, so exact boundary hits (and the
    // x = 0 tie of even-level codebooks) resolve to the upper level.
    const arma::uword idx = std::upper_bound(t.begin(), t.end(), x) - t.begin();
    return cb.levels(idx);
}

std::complex<double> lloyd_max_quantize(std::complex<double> x, int bits) {
    return {lloyd_max_quantize(x.real(), bits), lloyd_max_quantize(x.imag(), bits)};
}

HardwareProfile HardwareProfile::ideal(int num_antennas) {
    HardwareProfile p;
    p.bs_adc_bits.assign(num_antennas, kIdealBits);
    p.bs_dac_bits.assign(num_antennas, kIdealBits);
    return p;
}

void HardwareProfile::validate(int num_antennas) const {
    if (kappa_tb < 0.0 || kappa_rb < 0.0 || kappa_tu < 0.0 || kappa_ru < 0.0)
        throw std::invalid_argument("HardwareProfile: EVM factors must be >= 0");
    auto check_bits = [](int b, const char* what) {
        if (b != kIdealBits && (b < 1 || b > kMaxBits))
            throw std::invalid_argument(std::string("HardwareProfile: ") + what +
                                        " resolution out of range");
    };
    if (static_cast<int>(bs_adc_bits.size()) != num_antennas ||
        static_cast<int>(bs_dac_bits.size()) != num_antennas)
        throw std::invalid_argument("HardwareProfile: per-antenna bit lists must have length M");
    for (int b : bs_adc_bits)
        check_bits(b, "BS ADC");
    for (int b : bs_dac_bits)
        check_bits(b, "BS DAC");
    check_bits(ue_adc_bits, "UE ADC");
    check_bits(ue_dac_bits, "UE DAC");
}

std::vector<int> equal_proportion_bits(const std::vector<int>& resolutions, int num_antennas) {
    if (resolutions.empty())
        throw std::invalid_argument("equal_proportion_bits: empty resolution list");
    const int n = static_cast<int>(resolutions.size());
    std::vector<int> out;
    out.reserve(num_antennas);
    const int base = num_antennas / n;
    const int extra = num_antennas % n;
    for (int i = 0; i < n; ++i) {
        const int count = base + (i < extra ? 1 : 0);
        out.insert(out.end(), count, resolutions[i]);
    }
    return out;
}

BussgangMatrices build_bussgang_matrices(const HardwareProfile& profile, int num_antennas) {
    profile.validate(num_antennas);
    BussgangMatrices bm;
    bm.a_adc.set_size(num_antennas);
    bm.a_dac.set_size(num_antennas);
    for (int i = 0; i < num_antennas; ++i) {
        bm.a_adc(i) = bussgang_gain(profile.bs_adc_bits[i]);
        bm.a_dac(i) = bussgang_gain(profile.bs_dac_bits[i]);
    }
    bm.b_adc = bm.a_adc % (1.0 - bm.a_adc);
    bm.b_dac = bm.a_dac % (1.0 - bm.a_dac);
    bm.alpha_a_ue = bussgang_gain(profile.ue_adc_bits);
    bm.alpha_d_ue = bussgang_gain(profile.ue_dac_bits);
    return bm;
}

arma::vec conditional_diag_covariance(const std::vector<arma::cx_vec>& samples) {
    if (samples.empty())
        throw std::domain_error("conditional_diag_covariance: at least one sample required");
    arma::vec acc(samples.front().n_elem, arma::fill::zeros);
    for (const arma::cx_vec& s : samples) {
        if (s.n_elem != acc.n_elem)
            throw std::invalid_argument("conditional_diag_covariance: inconsistent dimensions");
        acc += arma::square(arma::abs(s));
    }
    return acc / double(samples.size());
}

std::string distortion_table_csv(int max_bits) {
    std::ostringstream os;
    os << "bits,rho,alpha\n";
    char buf[96];
    for (int b = 1; b <= max_bits; ++b) {
        const double rho = distortion_factor(b);
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", b, rho, 1.0 - rho);
        os << buf;
    }
    os << "ideal,0,1\n";
    return os.str();
}

} // namespace lsfp
