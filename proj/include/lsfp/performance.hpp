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

#ifndef LSFP_PERFORMANCE_HPP
#define LSFP_PERFORMANCE_HPP

#include <memory>
#include <string>
#include <vector>

#include "lsfp/precoding.hpp"

namespace lsfp {

/// LSFP coefficient tensor gamma(l,k,r): weight applied by BS r to the symbol
/// of UE (l,k) in pilot group k. Real nonnegative; per-BS power constraint
/// sum_{l,k} gamma(l,k,r)^2 <= rho_d.
struct LsfpWeights {
    arma::cube gamma; // L x K x L, slice index = serving BS r
    double rho_d = 0.0;

    double bs_power(int r) const { return arma::accu(arma::square(gamma.slice(r))); }
    double max_power_slack() const;
    bool feasible(double tol = 1e-9) const;
};

/// Block-diagonal single-layer weights gamma(l,k,l) = sqrt(p_lk).
LsfpWeights slp_weights(const arma::mat& powers, double rho_d);

/// Equal power split across the K own-cell UEs of every BS.
LsfpWeights slp_equal_power(int L, int K, double rho_d);

/// Monte-Carlo estimates of the statistical terms of the hardening-bound
/// SINR: effective-channel means b, pilot-group second moments C, and the
/// diagonal DAC/RF distortion couplings e (DAC) and f (transmit EVM).
struct SinrTerms {
    int L = 0, K = 0;
    double prelog = 0.0;  // (tau_c - tau_p)/tau_c
    double sigma2 = 0.0;
    double alpha_a = 1.0; // UE ADC gain
    double kappa_ru = 0.0;
    double kappa_tb = 0.0;
    arma::mat omega; // L x K precoder normalizations (for replaying draws)

    std::vector<arma::cx_vec> b_terms;  // (l,k): length-L vector over serving BS
    std::vector<arma::cx_mat> c_terms;  // (l,k,k'): L x L Hermitian PSD
    std::vector<arma::vec> e_terms;     // (l,k,k'): length-L over BS
    std::vector<arma::vec> f_terms;     // (l,k,k'): length-L over BS

    const arma::cx_vec& b(int l, int k) const { return b_terms[size_t(l) * K + k]; }
    const arma::cx_mat& c(int l, int k, int kp) const {
        return c_terms[(size_t(l) * K + k) * K + kp];
    }
    const arma::vec& e(int l, int k, int kp) const { return e_terms[(size_t(l) * K + k) * K + kp]; }
    const arma::vec& f(int l, int k, int kp) const { return f_terms[(size_t(l) * K + k) * K + kp]; }

    std::string to_text() const;
    static SinrTerms from_text(const std::string& text);
};

/// Real quadratic-form view of the SINR: numerator N = a^2 g'Mg over the own
/// block, denominator D = c1 * sum of g'Tg over all blocks + a*sigma2 - N.
struct SinrQuadratics {
    int L = 0, K = 0;
    double prelog = 0.0;
    double a = 1.0;           // alpha_a
    double noise = 0.0;       // a * sigma2
    double interf_coef = 0.0; // a * (1 + kappa_ru^2)
    std::vector<arma::mat> m_desired; // (l,k): L x L
    std::vector<arma::mat> t_interf;  // (l,k,k'): L x L

    const arma::mat& M(int l, int k) const { return m_desired[size_t(l) * K + k]; }
    const arma::mat& T(int l, int k, int kp) const {
        return t_interf[(size_t(l) * K + k) * K + kp];
    }
    double numerator(int l, int k, const arma::cube& g) const;
    double denominator(int l, int k, const arma::cube& g) const;
};

SinrQuadratics build_quadratics(const SinrTerms& terms);

/// One scenario + hardware profile + precoder kind, with everything
/// realization-independent precomputed. realize() is pure in (seed, index),
/// so realizations can run on any thread in any order.
class MonteCarloEngine {
  public:
    MonteCarloEngine(const Scenario& scenario, const HardwareProfile& profile, PrecoderKind kind);

    struct Realization {
        ChannelGrid h;
        PilotObservation pilots;
        std::vector<arma::cx_mat> h_hat; // per BS l: own-cell estimates, M x K
        std::vector<arma::cx_mat> v;     // per BS l: unnormalized directions, M x K
    };

    void realize(std::uint64_t seed, std::uint64_t index, Realization& out) const;

    const Estimator& estimator() const { return *estimator_; }
    const ChannelStatsSet& stats() const { return stats_; }
    const BussgangMatrices& bussgang() const { return bussgang_; }
    const HardwareProfile& profile() const { return profile_; }
    const SystemConfig& config() const { return scenario_.config; }
    PrecoderKind precoder_kind() const { return kind_; }

  private:
    Scenario scenario_;
    HardwareProfile profile_;
    PrecoderKind kind_;
    ChannelStatsSet stats_;
    BussgangMatrices bussgang_;
    std::unique_ptr<Estimator> estimator_;
    std::unique_ptr<LocalPrecoder> precoder_;
};

/// Averages the Eq.-15-style expectations over n_mc joint draws with common
/// random numbers. threads = 0 picks a hardware-based default; results are
/// bit-identical for a fixed thread count and within 1e-10 relative across
/// thread counts (fixed chunked reduction order).
SinrTerms estimate_sinr_terms(const MonteCarloEngine& engine, int n_mc, std::uint64_t seed,
                              int threads = 1);

/// Closed-form hardening-bound SINR per UE (L x K).
arma::mat sinr_closed_form(const SinrTerms& terms, const LsfpWeights& weights);

/// Sum spectral efficiency, bits/s/Hz, with the pilot-overhead prelog.
double sum_se(const SinrTerms& terms, const LsfpWeights& weights);

/// Direct Monte-Carlo of the received downlink signal: simulates the full
/// two-layer precoding and impairment chain per realization, regresses the
/// received sample on the desired symbol and returns |coeff|^2 / residual
/// power per UE. Independent oracle for sinr_closed_form.
arma::mat mc_validate_sinr(const MonteCarloEngine& engine, const LsfpWeights& weights,
                           const arma::mat& omega, int n_mc, std::uint64_t seed,
                           int symbols_per_realization = 2, int threads = 1);

} // namespace lsfp

#endif
