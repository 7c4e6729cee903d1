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

#include "lsfp/channels.hpp"
#include "lsfp/linalg.hpp"
#include "lsfp/scenario.hpp"

using namespace lsfp;

namespace {

// Quadrature oracle for the local scattering integral: averages the ULA phase
// over the Gaussian angle perturbation with composite Simpson weights.
arma::cx_mat local_scattering_quadrature(double theta, double asd, int m) {
    const int n = 4001; // odd
    const double half_width = 12.0 * asd;
    const double h = 2.0 * half_width / (n - 1);
    arma::cx_mat acc(m, m, arma::fill::zeros);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -half_width + i * h;
        double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        w *= std::exp(-0.5 * x * x / (asd * asd));
        const arma::cx_vec a = steering_vector(theta + x, m);
        acc += w * (a * a.t());
        wsum += w;
    }
    return acc / wsum;
}

SystemConfig desk_config() {
    SystemConfig c;
    c.num_cells = 2;
    c.ues_per_cell = 2;
    c.num_antennas = 16;
    c.pilot_len = 2;
    return c;
}

} // namespace

TEST_SUITE("scenario") {

    TEST_CASE("large-scale fading reference values") {
        CHECK(10.0 * std::log10(large_scale_fading(1.0)) == doctest::Approx(-30.5));
        CHECK(10.0 * std::log10(large_scale_fading(100.0)) == doctest::Approx(-103.9));
        CHECK(10.0 * std::log10(large_scale_fading(35.0)) ==
              doctest::Approx(-87.1673).epsilon(1e-4));
        CHECK_THROWS_AS(large_scale_fading(0.0), std::domain_error);
        CHECK_THROWS_AS(large_scale_fading(-3.0), std::domain_error);
    }

    TEST_CASE("rician factor model and limits") {
        CHECK(rician_factor(1e-9) == doctest::Approx(std::pow(10.0, 1.3)).epsilon(1e-6));
        CHECK(rician_kbar(0.0) == doctest::Approx(0.0));
        CHECK(rician_kbar(1e12) == doctest::Approx(1.0));
        CHECK(rician_factor(50.0) > rician_factor(300.0));
        CHECK_THROWS_AS(rician_factor(0.0), std::domain_error);
    }

    TEST_CASE("correlation matrix basics") {
        SUBCASE("scalar M") {
            const arma::cx_mat s = build_correlation_matrix(0.3, 0.1, 1);
            CHECK(s.n_rows == 1);
            CHECK(s(0, 0).real() == doctest::Approx(1.0));
        }
        SUBCASE("zero ASD is the rank-one steering outer product") {
            const double theta = 0.7;
            const arma::cx_mat s = build_correlation_matrix(theta, 0.0, 6);
            const arma::cx_vec a = steering_vector(theta, 6);
            CHECK(arma::norm(s - a * a.t(), "fro") < 1e-9);
            const arma::vec ev = arma::eig_sym(s);
            CHECK(ev(5) == doctest::Approx(6.0)); // single eigenvalue M, rest 0
            CHECK(std::abs(ev(0)) < 1e-9);
        }
        SUBCASE("trace normalized to M, Hermitian PSD") {
            for (double theta : {0.0, 0.4, -1.1}) {
                const arma::cx_mat s = build_correlation_matrix(theta, deg_to_rad(30.0), 8);
                CHECK(arma::trace(s).real() == doctest::Approx(8.0));
                CHECK(hermiticity_error(s) < 1e-12);
                CHECK(arma::eig_sym(s).min() > -1e-10 * arma::eig_sym(s).max());
            }
        }
    }

    TEST_CASE("correlation matrix vs quadrature oracle") {
        // The closed form is a small-ASD approximation: tight for narrow
        // spreads, measured at 5.6% Frobenius-relative for the 30-degree
        // spread used in the simulations (quadrature oracle, theta=0, M=4).
        struct Row {
            double asd_deg, tol;
        };
        for (const Row row : {Row{5.0, 0.02}, Row{10.0, 0.02}, Row{15.0, 0.02}, Row{30.0, 0.06}}) {
            const double asd = deg_to_rad(row.asd_deg);
            const arma::cx_mat closed = build_correlation_matrix(0.0, asd, 4);
            arma::cx_mat quad = local_scattering_quadrature(0.0, asd, 4);
            quad *= 4.0 / arma::trace(quad).real();
            const double rel = arma::norm(closed - quad, "fro") / arma::norm(quad, "fro");
            CAPTURE(row.asd_deg);
            CHECK(rel < row.tol);
        }
    }

    TEST_CASE("network generation geometry") {
        SystemConfig cfg;
        cfg.num_cells = 4;
        cfg.ues_per_cell = 5;
        cfg.num_antennas = 4;
        const Scenario sc = generate_network(cfg);
        CHECK(sc.bs_xy.n_rows == 4);
        CHECK(sc.ue_xy.n_rows == 20);
        // 2x2 grid centers of a 1000 m square
        CHECK(arma::abs(sc.bs_xy).max() == doctest::Approx(250.0));
        CHECK(sc.distance.min() >= cfg.min_bs_ue_dist_m);

        SUBCASE("single-cell degenerate network") {
            SystemConfig one;
            one.num_cells = 1;
            one.ues_per_cell = 1;
            one.num_antennas = 1;
            one.pilot_len = 1;
            const Scenario s1 = generate_network(one);
            CHECK(s1.bs_xy(0, 0) == doctest::Approx(0.0));
            CHECK(s1.bs_xy(0, 1) == doctest::Approx(0.0));
            CHECK(s1.ue_xy.n_rows == 1);
        }
        SUBCASE("same seed reproduces coordinates exactly") {
            const Scenario again = generate_network(cfg);
            CHECK(arma::norm(sc.ue_xy - again.ue_xy, "inf") == 0.0);
            CHECK(arma::norm(sc.bs_xy - again.bs_xy, "inf") == 0.0);
        }
        SUBCASE("different seed moves the UEs") {
            SystemConfig other = cfg;
            other.seed = 99;
            CHECK(arma::norm(generate_network(other).ue_xy - sc.ue_xy, "inf") > 0.0);
        }
        SUBCASE("infeasible minimum distance") {
            SystemConfig bad = cfg;
            bad.area_side_m = 60.0; // 30 m cells cannot honor a 35 m standoff
            CHECK_THROWS_AS(generate_network(bad), std::runtime_error);
        }
    }

    TEST_CASE("channel statistics invariants") {
        SystemConfig cfg = desk_config();
        const Scenario sc = generate_network(cfg);
        const ChannelStatsSet stats = build_channel_statistics(sc);
        for (int l = 0; l < cfg.num_cells; ++l)
            for (int k = 0; k < cfg.ues_per_cell; ++k)
                for (int j = 0; j < cfg.num_cells; ++j) {
                    const ChannelStatistics& st = stats.at(l, k, j);
                    const double m = cfg.num_antennas;
                    const double kbar = rician_kbar(st.k_factor);
                    CHECK(hermiticity_error(st.R) < 1e-12);
                    CHECK(arma::eig_sym(st.R).min() >= -1e-10 * arma::eig_sym(st.R).max());
                    CHECK(arma::trace(st.R).real() ==
                          doctest::Approx(st.beta * (1.0 - kbar) * m).epsilon(1e-9));
                    CHECK(std::pow(arma::norm(st.h_bar), 2) ==
                          doctest::Approx(st.beta * kbar * m).epsilon(1e-9));
                    CHECK(arma::trace(st.R_bar).real() ==
                          doctest::Approx(st.beta * m).epsilon(1e-9));
                    CHECK(arma::norm(st.R_sqrt * st.R_sqrt - st.R, "fro") <=
                          1e-9 * std::max(arma::norm(st.R, "fro"), 1e-300));
                }
    }

    TEST_CASE("scenario text round trip") {
        SystemConfig cfg = desk_config();
        const Scenario sc = generate_network(cfg);
        const Scenario back = Scenario::from_text(sc.to_text());
        CHECK(arma::norm(sc.ue_xy - back.ue_xy, "inf") == 0.0);
        CHECK(arma::norm(sc.bs_xy - back.bs_xy, "inf") == 0.0);
        CHECK(arma::norm(sc.distance - back.distance, "inf") == 0.0);
        CHECK_THROWS(Scenario::from_text("garbage"));
    }

    TEST_CASE("config validation") {
        SystemConfig bad = desk_config();
        bad.pilot_len = 1; // < K
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = desk_config();
        bad.coherence_len = bad.pilot_len;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = desk_config();
        bad.noise_power_w = 0.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
}
