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

#ifndef LSFP_HARDWARE_HPP
#define LSFP_HARDWARE_HPP

#include <armadillo>
#include <complex>
#include <string>
#include <vector>

namespace lsfp {

/// Sentinel resolution for an ideal (infinite-resolution) converter.
constexpr int kIdealBits = 0;
constexpr int kMaxBits = 15;

/// EVM factors of the RF chains plus per-converter bit resolutions.
/// bs_adc_bits / bs_dac_bits have one entry per BS antenna.
struct HardwareProfile {
    double kappa_tb = 0.0; // BS transmit EVM
    double kappa_rb = 0.0; // BS receive EVM
    double kappa_tu = 0.0; // UE transmit EVM
    double kappa_ru = 0.0; // UE receive EVM
    std::vector<int> bs_adc_bits;
    std::vector<int> bs_dac_bits;
    int ue_adc_bits = kIdealBits;
    int ue_dac_bits = kIdealBits;

    static HardwareProfile ideal(int num_antennas);

    void validate(int num_antennas) const;
};

/// Antenna blocks of equal size (first blocks take the remainder), one block
/// per listed resolution. Statistics only depend on the proportions.
std::vector<int> equal_proportion_bits(const std::vector<int>& resolutions, int num_antennas);

/// Bussgang gain/noise diagonals derived from a profile: quantizer output is
/// alpha*input plus uncorrelated distortion with per-entry variance
/// alpha*(1-alpha) times the conditional input power.
struct BussgangMatrices {
    arma::vec a_adc; // diag(A_a), BS uplink ADCs
    arma::vec b_adc; // diag(B_a) = diag(A_a (I - A_a))
    arma::vec a_dac; // diag(A_d), BS downlink DACs
    arma::vec b_dac; // diag(B_d)
    double alpha_a_ue = 1.0; // UE ADC gain alpha_a_lk
    double alpha_d_ue = 1.0; // UE DAC gain alpha_d_lk
};

/// Minimum MSE of a Lloyd-Max scalar quantizer for unit-variance Gaussian
/// input at the given resolution. Ideal resolution maps to 0.
double distortion_factor(int bits);

/// Bussgang gain alpha = 1 - distortion_factor(bits).
double bussgang_gain(int bits);

BussgangMatrices build_bussgang_matrices(const HardwareProfile& profile, int num_antennas);

/// Optimal scalar quantizer codebook for unit-variance Gaussian input.
struct LloydMaxCodebook {
    int bits = 0;
    arma::vec levels;     // 2^bits reproduction values, ascending
    arma::vec thresholds; // 2^bits - 1 decision boundaries
    double rho = 0.0;     // MMSE distortion factor
};

const LloydMaxCodebook& lloyd_max_codebook(int bits);

/// Nearest-codeword quantization for unit-variance-scaled input. Cells are
/// right-open, so boundary inputs (including 0) round toward the upper level.
double lloyd_max_quantize(double x, int bits);

/// Complex input, quantized independently per real/imaginary part. The caller
/// pre-scales each component to unit variance.
std::complex<double> lloyd_max_quantize(std::complex<double> x, int bits);

/// Sample-average diagonal of the second moment E[x x^H].
arma::vec conditional_diag_covariance(const std::vector<arma::cx_vec>& samples);

/// CSV rows "bits,rho,alpha" for resolutions 1..max_bits plus the ideal row.
std::string distortion_table_csv(int max_bits = 8);

} // namespace lsfp

#endif
