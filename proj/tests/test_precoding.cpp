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

#include <doctest.h>

#include "lsfp/performance.hpp"
#include "lsfp/harness.hpp"
#include "test_util.hpp"

using namespace lsfp;
using lsfp::test::desk_system;
using lsfp::test::tiny_system;

namespace {

double collinearity(const arma::cx_vec& a, const arma::cx_vec& b) {
    return std::abs(arma::cdot(a, b)) / (arma::norm(a) * arma::norm(b));
}

arma::cx_mat random_hpd(int n, Rng& rng, double ridge = 0.1) {
    arma::cx_mat x(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            x(i, j) = rng.cgaussian();
    arma::cx_mat m = x * x.t();
    m.diag() += ridge;
    return m;
}

double uplink_sinr(const arma::cx_vec& v, const arma::cx_vec& a_tilde, const arma::cx_mat& b_mat) {
    return std::norm(arma::cdot(v, a_tilde)) /
           arma::as_scalar(arma::real(v.t() * b_mat * v));
}

// Uplink interference-plus-noise matrix of UE (l,k) and its effective desired
// vector, assembled directly from the estimator statistics. The precoder's
// system matrix must equal b_mat + a_tilde*a_tilde^H.
struct UplinkForm {
    arma::cx_vec a_tilde;
    arma::cx_mat b_mat;
};

UplinkForm assemble_uplink_form(const MonteCarloEngine& engine,
                                const MonteCarloEngine::Realization& real, int l, int k) {
    const SystemConfig& cfg = engine.config();
    const int L = cfg.num_cells, K = cfg.ues_per_cell, M = cfg.num_antennas;
    const double p = cfg.pilot_power_w;
    const double kappa_tu = engine.profile().kappa_tu;
    const double kappa_rb = engine.profile().kappa_rb;
    const double alpha_d = engine.bussgang().alpha_d_ue;
    const double at = alpha_d * (1.0 + kappa_tu * kappa_tu);
    const arma::vec& a = engine.bussgang().a_adc;
    const arma::vec& b = engine.bussgang().b_adc;
    const arma::cx_mat a_diag = arma::diagmat(arma::cx_vec(a, arma::vec(M, arma::fill::zeros)));

    arma::cx_mat sum(M, M, arma::fill::zeros);
    arma::vec wbar(M, arma::fill::zeros);
    for (int kp = 0; kp < K; ++kp) {
        const arma::cx_vec hh = real.h_hat[l].col(kp);
        const arma::cx_mat blk = hh * hh.t() + engine.estimator().error_cov(l, kp);
        sum += at * p * a_diag * blk * a_diag;
        wbar += at * p * arma::real(blk.diag());
    }
    for (int lp = 0; lp < L; ++lp) {
        if (lp == l)
            continue;
        for (int kp = 0; kp < K; ++kp) {
            const arma::cx_mat& rbar = engine.stats().at(lp, kp, l).R_bar;
            sum += at * p * a_diag * rbar * a_diag;
            wbar += at * p * arma::real(rbar.diag());
        }
    }
    const arma::vec s_hat = (1.0 + kappa_rb * kappa_rb) * wbar +
                            cfg.noise_power_w * arma::vec(M, arma::fill::ones);
    sum.diag() += arma::cx_vec(kappa_rb * kappa_rb * (a % a % wbar) + b % s_hat +
                                   cfg.noise_power_w * (a % a),
                               arma::vec(M, arma::fill::zeros));

    UplinkForm f;
    f.a_tilde = alpha_d * std::sqrt(p) * (arma::cx_vec(a, arma::vec(M, arma::fill::zeros)) %
                                          real.h_hat[l].col(k));
    f.b_mat = sum - f.a_tilde * f.a_tilde.t();
    return f;
}

} // namespace

TEST_SUITE("precoding") {

    TEST_CASE("rank-one update identity keeps the solve direction") {
        Rng rng(31);
        for (int trial = 0; trial < 50; ++trial) {
            const arma::cx_mat a_mat = random_hpd(6, rng);
            const arma::cx_vec a_vec = rng.cgaussian_vec(6);
            const arma::cx_vec lhs = arma::solve(a_mat + a_vec * a_vec.t(), a_vec);
            const arma::cx_vec rhs = arma::solve(a_mat, a_vec);
            CHECK(collinearity(lhs, rhs) >= 1.0 - 1e-10);
        }
    }

    TEST_CASE("generalized Rayleigh quotient optimality on random instances") {
        Rng rng(32);
        for (int trial = 0; trial < 100; ++trial) {
            const arma::cx_mat b_mat = random_hpd(5, rng);
            const arma::cx_vec a_vec = rng.cgaussian_vec(5);
            const arma::cx_vec v_opt = arma::solve(b_mat, a_vec);
            const double best = uplink_sinr(v_opt, a_vec, b_mat);
            for (int p = 0; p < 20; ++p) {
                arma::cx_vec pert = v_opt + 1e-3 * arma::norm(v_opt) * rng.cgaussian_vec(5);
                CHECK(uplink_sinr(pert, a_vec, b_mat) <= best * (1.0 + 1e-8));
            }
        }
    }

    TEST_CASE("MR precoder basics") {
        SystemConfig cfg = tiny_system();
        const Scenario sc = generate_network(cfg);
        const ChannelStatsSet stats = build_channel_statistics(sc);
        const HardwareProfile hw = HardwareProfile::ideal(cfg.num_antennas);
        const BussgangMatrices bm = build_bussgang_matrices(hw, cfg.num_antennas);
        const Estimator est(stats, bm, hw, cfg);
        const LocalPrecoder mr(PrecoderKind::kMr, stats, est, bm, hw, cfg);

        arma::cx_mat h_hat(cfg.num_antennas, cfg.ues_per_cell, arma::fill::ones);
        h_hat.col(1) *= cx_double(0.0, 2.0);
        const arma::cx_mat v = mr.directions(0, h_hat);
        CHECK(arma::norm(v - h_hat, "fro") == 0.0); // direction is the estimate itself

        SUBCASE("scaling the estimate leaves the normalized direction unchanged") {
            const arma::cx_mat v2 = mr.directions(0, arma::cx_mat(3.0 * h_hat));
            CHECK(collinearity(v2.col(0), v.col(0)) == doctest::Approx(1.0));
        }
        SUBCASE("zero estimate is a degenerate input") {
            arma::cx_mat zero(cfg.num_antennas, cfg.ues_per_cell, arma::fill::zeros);
            CHECK_THROWS_AS(mr.directions(0, zero), std::runtime_error);
        }
    }

    TEST_CASE("MC normalization is consistent with the analytic estimate power") {
        SystemConfig cfg = tiny_system();
        const Scenario sc = generate_network(cfg);
        const HardwareProfile hw = make_preset("moderate", cfg.num_antennas);
        const MonteCarloEngine engine(sc, hw, PrecoderKind::kMr);
        const int n = 1000;
        MonteCarloEngine::Realization r;
        std::vector<double> norms;
        for (int t = 0; t < n; ++t) {
            engine.realize(cfg.seed, t, r);
            norms.push_back(std::pow(arma::norm(r.v[0].col(0)), 2));
        }
        const double omega = normalize_precoders(norms);
        // for MR, E||v||^2 = trace of the estimate covariance
        const double analytic = arma::trace(engine.estimator().estimate_cov(0, 0)).real();
        CHECK(1.0 / (omega * omega) == doctest::Approx(analytic).epsilon(0.1));

        // E||omega*v||^2 = 1 within MC tolerance on a fresh realization set
        double acc = 0.0;
        for (int t = 0; t < n; ++t) {
            engine.realize(cfg.seed + 1, t, r);
            acc += std::pow(omega * arma::norm(r.v[0].col(0)), 2);
        }
        CHECK(acc / n == doctest::Approx(1.0).epsilon(0.1));
    }

    TEST_CASE("normalize_precoders contract") {
        CHECK(normalize_precoders({4.0, 4.0, 4.0}) == doctest::Approx(0.5));
        std::vector<double> scaled = {9.0 * 4.0};
        CHECK(normalize_precoders(scaled) == doctest::Approx(0.5 / 3.0));
        CHECK_THROWS_AS(normalize_precoders({}), std::invalid_argument);
        CHECK_THROWS_AS(normalize_precoders({0.0, 0.0}), std::runtime_error);
    }

    TEST_CASE("DU-MMSE limiting behavior") {
        SystemConfig cfg = tiny_system();
        const Scenario sc = generate_network(cfg);
        const ChannelStatsSet stats = build_channel_statistics(sc);
        const HardwareProfile hw = HardwareProfile::ideal(cfg.num_antennas);
        const BussgangMatrices bm = build_bussgang_matrices(hw, cfg.num_antennas);

        SUBCASE("noise-dominated inverse keeps the matched-filter direction") {
            SystemConfig loud = cfg;
            loud.noise_power_w = 1.0; // sigma^2 huge vs channel powers
            const Estimator est(stats, bm, hw, loud);
            const LocalPrecoder du(PrecoderKind::kDuMmse, stats, est, bm, hw, loud);
            Rng rng(5);
            arma::cx_mat h_hat(cfg.num_antennas, cfg.ues_per_cell);
            for (arma::uword i = 0; i < h_hat.n_elem; ++i)
                h_hat(i) = 1e-5 * rng.cgaussian();
            const arma::cx_mat v = du.directions(0, h_hat);
            for (int k = 0; k < cfg.ues_per_cell; ++k)
                CHECK(collinearity(v.col(k), h_hat.col(k)) > 1.0 - 1e-6);
        }
    }

    TEST_CASE("DA-MMSE equals DU-MMSE under ideal hardware") {
        SystemConfig cfg = desk_system();
        const Scenario sc = generate_network(cfg);
        const HardwareProfile hw = HardwareProfile::ideal(cfg.num_antennas);
        const MonteCarloEngine da(sc, hw, PrecoderKind::kDaMmse);
        const MonteCarloEngine du(sc, hw, PrecoderKind::kDuMmse);
        MonteCarloEngine::Realization ra, rd;
        for (int t = 0; t < 5; ++t) {
            da.realize(cfg.seed, t, ra);
            du.realize(cfg.seed, t, rd);
            for (int l = 0; l < cfg.num_cells; ++l)
                for (int k = 0; k < cfg.ues_per_cell; ++k)
                    CHECK(collinearity(ra.v[l].col(k), rd.v[l].col(k)) >= 1.0 - 1e-6);
        }
    }

    TEST_CASE("DA-MMSE maximizes the impaired uplink SINR") {
        SystemConfig cfg = tiny_system();
        const Scenario sc = generate_network(cfg);
        const HardwareProfile hw = make_preset("severe", cfg.num_antennas);
        const MonteCarloEngine engine(sc, hw, PrecoderKind::kDaMmse);
        const MonteCarloEngine du_engine(sc, hw, PrecoderKind::kDuMmse);
        MonteCarloEngine::Realization r, rdu;
        Rng rng(55);
        for (int t = 0; t < 20; ++t) {
            engine.realize(cfg.seed, t, r);
            du_engine.realize(cfg.seed, t, rdu);
            for (int l = 0; l < cfg.num_cells; ++l) {
                for (int k = 0; k < cfg.ues_per_cell; ++k) {
                    const UplinkForm f = assemble_uplink_form(engine, r, l, k);
                    const arma::cx_vec& v_da = r.v[l].col(k);
                    const double s_da = uplink_sinr(v_da, f.a_tilde, f.b_mat);
                    // optimal against the closed-form combiner
                    const arma::cx_vec v_star = arma::solve(f.b_mat, f.a_tilde);
                    CHECK(collinearity(v_da, v_star) >= 1.0 - 1e-8);
                    // beats the distortion-unaware and MR directions
                    CHECK(s_da >= uplink_sinr(rdu.v[l].col(k), f.a_tilde, f.b_mat) *
                                      (1.0 - 1e-9));
                    CHECK(s_da >=
                          uplink_sinr(r.h_hat[l].col(k), f.a_tilde, f.b_mat) * (1.0 - 1e-9));
                    // random perturbations never help
                    for (int pert = 0; pert < 5; ++pert) {
                        const arma::cx_vec vp =
                            v_da + 1e-3 * arma::norm(v_da) *
                                       rng.cgaussian_vec(cfg.num_antennas);
                        CHECK(uplink_sinr(vp, f.a_tilde, f.b_mat) <= s_da * (1.0 + 1e-8));
                    }
                }
            }
        }
    }
}
