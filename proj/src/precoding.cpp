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

#include "lsfp/precoding.hpp"

#include <stdexcept>

namespace lsfp {

std::string to_string(PrecoderKind kind) {
    switch (kind) {
    case PrecoderKind::kMr:
        return "mr";
    case PrecoderKind::kDuMmse:
        return "du-mmse";
    case PrecoderKind::kDaMmse:
        return "da-mmse";
    }
    return "?";
}

PrecoderKind precoder_from_string(const std::string& name) {
    if (name == "mr")
        return PrecoderKind::kMr;
    if (name == "du" || name == "du-mmse")
        return PrecoderKind::kDuMmse;
    if (name == "da" || name == "da-mmse")
        return PrecoderKind::kDaMmse;
    throw std::invalid_argument("unknown precoder '" + name + "'");
}

LocalPrecoder::LocalPrecoder(PrecoderKind kind, const ChannelStatsSet& stats,
                             const Estimator& estimator, const BussgangMatrices& bussgang,
                             const HardwareProfile& profile, const SystemConfig& config)
    : kind_(kind), L_(stats.num_cells()), K_(stats.ues_per_cell()), M_(stats.num_antennas()),
      sigma2_(config.noise_power_w), pilot_power_(config.pilot_power_w),
      alpha_d_tilde_(bussgang.alpha_d_ue * (1.0 + profile.kappa_tu * profile.kappa_tu)),
      kappa_rb_(profile.kappa_rb), a_adc_(bussgang.a_adc) {
    if (kind_ == PrecoderKind::kMr)
        return;

    const double p = pilot_power_;
    base_.resize(L_);
    wbar_base_.resize(L_);
    const arma::cx_vec a_cx(a_adc_, arma::vec(M_, arma::fill::zeros));

    for (int l = 0; l < L_; ++l) {
        arma::cx_mat base(M_, M_, arma::fill::zeros);
        if (kind_ == PrecoderKind::kDuMmse) {
            for (int k = 0; k < K_; ++k)
                base += p * estimator.error_cov(l, k);
            for (int lp = 0; lp < L_; ++lp) {
                if (lp == l)
                    continue;
                for (int k = 0; k < K_; ++k)
                    base += p * stats.at(lp, k, l).R_bar;
            }
            base.diag() += sigma2_;
        } else {
            // Distortion-aware system matrix: sandwich every channel term in
            // the ADC gains and add the diagonal Bussgang/EVM noise statistics.
            arma::vec wbar(M_, arma::fill::zeros);
            for (int k = 0; k < K_; ++k) {
                arma::cx_mat c = estimator.error_cov(l, k);
                wbar += alpha_d_tilde_ * p * arma::real(c.diag());
                c.each_col() %= a_cx;
                c.each_row() %= arma::conv_to<arma::cx_rowvec>::from(a_cx.t());
                base += alpha_d_tilde_ * p * c;
            }
            for (int lp = 0; lp < L_; ++lp) {
                if (lp == l)
                    continue;
                for (int k = 0; k < K_; ++k) {
                    arma::cx_mat r = stats.at(lp, k, l).R_bar;
                    wbar += alpha_d_tilde_ * p * arma::real(r.diag());
                    r.each_col() %= a_cx;
                    r.each_row() %= arma::conv_to<arma::cx_rowvec>::from(a_cx.t());
                    base += alpha_d_tilde_ * p * r;
                }
            }
            base.diag() += arma::cx_vec(sigma2_ * (a_adc_ % a_adc_) +
                                            sigma2_ * bussgang.b_adc,
                                        arma::vec(M_, arma::fill::zeros));
            wbar_base_[l] = wbar;
        }
        base_[l] = base;
    }
    dist_coef_ = kappa_rb_ * kappa_rb_ * (a_adc_ % a_adc_) +
                 bussgang.b_adc * (1.0 + kappa_rb_ * kappa_rb_);
}

arma::cx_mat LocalPrecoder::directions(int l, const arma::cx_mat& h_hat_cols) const {
    if (static_cast<int>(h_hat_cols.n_cols) != K_ || static_cast<int>(h_hat_cols.n_rows) != M_)
        throw std::invalid_argument("LocalPrecoder::directions: estimate block must be M x K");

    if (kind_ == PrecoderKind::kMr) {
        for (int k = 0; k < K_; ++k)
            if (!(arma::norm(h_hat_cols.col(k)) > 0.0))
                throw std::runtime_error("mr precoder: zero-norm channel estimate");
        return h_hat_cols;
    }

    const double p = pilot_power_;
    arma::cx_mat sys = base_[l];
    arma::cx_mat rhs;
    if (kind_ == PrecoderKind::kDuMmse) {
        for (int k = 0; k < K_; ++k)
            sys += p * h_hat_cols.col(k) * h_hat_cols.col(k).t();
        rhs = h_hat_cols;
    } else {
        const arma::cx_vec a_cx(a_adc_, arma::vec(M_, arma::fill::zeros));
        rhs = h_hat_cols;
        rhs.each_col() %= a_cx; // A_a h_hat
        arma::vec wbar = wbar_base_[l];
        for (int k = 0; k < K_; ++k) {
            sys += alpha_d_tilde_ * p * rhs.col(k) * rhs.col(k).t();
            wbar += alpha_d_tilde_ * p * arma::square(arma::abs(h_hat_cols.col(k)));
        }
        sys.diag() += arma::cx_vec(dist_coef_ % wbar, arma::vec(M_, arma::fill::zeros));
    }

    arma::cx_mat v;
    if (!arma::solve(v, sys, rhs, arma::solve_opts::likely_sympd))
        throw std::runtime_error("LocalPrecoder::directions: linear solve failed");
    return v;
}

double normalize_precoders(const std::vector<double>& norm_sq_samples) {
    if (norm_sq_samples.empty())
        throw std::invalid_argument("normalize_precoders: no samples");
    double mean = 0.0;
    for (double v : norm_sq_samples)
        mean += v;
    mean /= double(norm_sq_samples.size());
    if (!(mean > 0.0))
        throw std::runtime_error("normalize_precoders: degenerate zero-power direction");
    return 1.0 / std::sqrt(mean);
}

} // namespace lsfp
