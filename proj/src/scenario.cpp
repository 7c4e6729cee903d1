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

#include "lsfp/scenario.hpp"

#include <cstdio>
#include <sstream>

#include "lsfp/channels.hpp"
#include "lsfp/linalg.hpp"
#include "lsfp/rng.hpp"

namespace lsfp {

double large_scale_fading(double distance_m, double ref_db, double slope_db) {
    if (!(distance_m > 0.0))
        throw std::domain_error("large_scale_fading: distance must be positive");
    return db_to_linear(ref_db - slope_db * std::log10(distance_m));
}

double rician_factor(double distance_m, double exp0, double slope_per_m) {
    if (!(distance_m > 0.0))
        throw std::domain_error("rician_factor: distance must be positive");
    return std::pow(10.0, exp0 - slope_per_m * distance_m);
}

arma::cx_mat build_correlation_matrix(double nominal_angle_rad, double asd_rad, int num_antennas) {
    if (num_antennas < 1)
        throw std::invalid_argument("build_correlation_matrix: M must be >= 1");
    if (asd_rad < 0.0)
        throw std::invalid_argument("build_correlation_matrix: ASD must be >= 0");

    const int m = num_antennas;
    const double s = std::sin(nominal_angle_rad);
    const double c = std::cos(nominal_angle_rad);
    arma::cx_mat sigma(m, m);
    for (int row = 0; row < m; ++row) {
        for (int col = 0; col < m; ++col) {
            const double d = arma::datum::pi * (row - col);
            const double spread = asd_rad * d * c;
            sigma(row, col) = std::polar(std::exp(-0.5 * spread * spread), d * s);
        }
    }
    sigma = psd_clip(sigma, "correlation matrix");
    const double tr = arma::trace(sigma).real();
    if (!(tr > 0.0))
        throw std::runtime_error("build_correlation_matrix: nonpositive trace");
    return sigma * (double(m) / tr);
}

Scenario generate_network(const SystemConfig& config) {
    config.validate();

    const int L = config.num_cells;
    const int K = config.ues_per_cell;

    // Regular grid covering the square area; cells are the grid rectangles.
    const int grid_x = static_cast<int>(std::ceil(std::sqrt(double(L))));
    const int grid_y = (L + grid_x - 1) / grid_x;
    const double cell_w = config.area_side_m / grid_x;
    const double cell_h = config.area_side_m / grid_y;

    Scenario sc;
    sc.config = config;
    sc.bs_xy.set_size(L, 2);
    sc.ue_xy.set_size(size_t(L) * K, 2);
    sc.distance.set_size(size_t(L) * K, L);
    sc.angle.set_size(size_t(L) * K, L);

    for (int l = 0; l < L; ++l) {
        const int gx = l % grid_x;
        const int gy = l / grid_x;
        sc.bs_xy(l, 0) = (gx + 0.5) * cell_w - 0.5 * config.area_side_m;
        sc.bs_xy(l, 1) = (gy + 0.5) * cell_h - 0.5 * config.area_side_m;
    }

    constexpr int kMaxDrawsPerUe = 10000;
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            Rng rng = make_stream(config.seed, {stream_tag::kScenario, std::uint64_t(l), std::uint64_t(k)});
            const double x0 = sc.bs_xy(l, 0) - 0.5 * cell_w;
            const double y0 = sc.bs_xy(l, 1) - 0.5 * cell_h;
            bool placed = false;
            for (int attempt = 0; attempt < kMaxDrawsPerUe && !placed; ++attempt) {
                const double x = x0 + rng.uniform() * cell_w;
                const double y = y0 + rng.uniform() * cell_h;
                bool ok = true;
                for (int j = 0; j < L; ++j) {
                    const double d = std::hypot(x - sc.bs_xy(j, 0), y - sc.bs_xy(j, 1));
                    if (d < config.min_bs_ue_dist_m) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    const int u = sc.ue_index(l, k);
                    sc.ue_xy(u, 0) = x;
                    sc.ue_xy(u, 1) = y;
                    placed = true;
                }
            }
            if (!placed)
                throw std::runtime_error("generate_network: cell too small for the minimum "
                                         "BS-UE distance constraint");
        }
    }

    for (int u = 0; u < L * K; ++u) {
        for (int j = 0; j < L; ++j) {
            const double dx = sc.ue_xy(u, 0) - sc.bs_xy(j, 0);
            const double dy = sc.ue_xy(u, 1) - sc.bs_xy(j, 1);
            sc.distance(u, j) = std::hypot(dx, dy);
            sc.angle(u, j) = std::atan2(dy, dx);
        }
    }
    return sc;
}

ChannelStatsSet build_channel_statistics(const Scenario& sc) {
    const SystemConfig& cfg = sc.config;
    const int L = cfg.num_cells;
    const int K = cfg.ues_per_cell;
    const int M = cfg.num_antennas;

    ChannelStatsSet set(L, K, M);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            const int u = sc.ue_index(l, k);
            for (int j = 0; j < L; ++j) {
                const double d = sc.distance(u, j);
                const double beta =
                    large_scale_fading(d, cfg.pathloss_ref_db, cfg.pathloss_slope_db);
                const double kf = rician_factor(d, cfg.rician_exp0, cfg.rician_slope_per_m);
                const double kbar = rician_kbar(kf);

                ChannelStatistics& st = set.at(l, k, j);
                st.beta = beta;
                st.k_factor = kf;
                st.h_bar = std::sqrt(beta * kbar) * steering_vector(sc.angle(u, j), M);
                st.R = beta * (1.0 - kbar) * build_correlation_matrix(sc.angle(u, j), cfg.asd_rad, M);
                st.R_bar = st.R + st.h_bar * st.h_bar.t();
                st.R_sqrt = psd_sqrt(st.R, "NLoS covariance");
            }
        }
    }
    return set;
}

std::string Scenario::to_text() const {
    std::ostringstream os;
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    os << "lsfp-scenario v1\n";
    os << "L=" << config.num_cells << " K=" << config.ues_per_cell << "\n";
    for (arma::uword l = 0; l < bs_xy.n_rows; ++l) {
        os << "bs " << l << " ";
        put(bs_xy(l, 0));
        os << " ";
        put(bs_xy(l, 1));
        os << "\n";
    }
    for (arma::uword u = 0; u < ue_xy.n_rows; ++u) {
        os << "ue " << u << " ";
        put(ue_xy(u, 0));
        os << " ";
        put(ue_xy(u, 1));
        os << "\n";
    }
    return os.str();
}

Scenario Scenario::from_text(const std::string& text) {
    std::istringstream is(text);
    std::string header, version;
    is >> header >> version;
    if (header != "lsfp-scenario" || version != "v1")
        throw std::invalid_argument("Scenario::from_text: unrecognized header");
    Scenario sc;
    std::string tok;
    is >> tok;
    if (tok.rfind("L=", 0) != 0)
        throw std::invalid_argument("Scenario::from_text: missing L");
    sc.config.num_cells = std::stoi(tok.substr(2));
    is >> tok;
    if (tok.rfind("K=", 0) != 0)
        throw std::invalid_argument("Scenario::from_text: missing K");
    sc.config.ues_per_cell = std::stoi(tok.substr(2));

    const int L = sc.config.num_cells;
    const int K = sc.config.ues_per_cell;
    sc.bs_xy.set_size(L, 2);
    sc.ue_xy.set_size(size_t(L) * K, 2);
    std::string kind;
    while (is >> kind) {
        arma::uword idx;
        double x, y;
        if (!(is >> idx >> x >> y))
            throw std::invalid_argument("Scenario::from_text: truncated record");
        if (kind == "bs" && idx < sc.bs_xy.n_rows) {
            sc.bs_xy(idx, 0) = x;
            sc.bs_xy(idx, 1) = y;
        } else if (kind == "ue" && idx < sc.ue_xy.n_rows) {
            sc.ue_xy(idx, 0) = x;
            sc.ue_xy(idx, 1) = y;
        } else {
            throw std::invalid_argument("Scenario::from_text: bad record '" + kind + "'");
        }
    }
    sc.distance.set_size(size_t(L) * K, L);
    sc.angle.set_size(size_t(L) * K, L);
    for (int u = 0; u < L * K; ++u) {
        for (int j = 0; j < L; ++j) {
            const double dx = sc.ue_xy(u, 0) - sc.bs_xy(j, 0);
            const double dy = sc.ue_xy(u, 1) - sc.bs_xy(j, 1);
            sc.distance(u, j) = std::hypot(dx, dy);
            sc.angle(u, j) = std::atan2(dy, dx);
        }
    }
    return sc;
}

} // namespace lsfp
