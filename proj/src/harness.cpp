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

#include "lsfp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace lsfp {

std::string to_string(Scheme scheme) { return scheme == Scheme::kSlp ? "slp" : "lsfp"; }

Scheme scheme_from_string(const std::string& name) {
    if (name == "slp")
        return Scheme::kSlp;
    if (name == "lsfp")
        return Scheme::kLsfp;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"ideal", "low", "moderate", "high", "severe"};
    return names;
}

HardwareProfile make_preset(const std::string& name, int num_antennas) {
    HardwareProfile p = HardwareProfile::ideal(num_antennas);
    auto set_kappas = [&p](double bs, double ue) {
        p.kappa_tb = p.kappa_rb = bs;
        p.kappa_tu = p.kappa_ru = ue;
    };
    if (name == "ideal") {
        // defaults
    } else if (name == "low") {
        set_kappas(0.01, 0.01);
        p.ue_adc_bits = p.ue_dac_bits = 5;
        p.bs_adc_bits = p.bs_dac_bits = equal_proportion_bits({3, 4, 5, 6}, num_antennas);
    } else if (name == "moderate") {
        set_kappas(0.1, 0.05);
        p.ue_adc_bits = p.ue_dac_bits = 4;
        p.bs_adc_bits = p.bs_dac_bits = equal_proportion_bits({2, 3, 4, 6}, num_antennas);
    } else if (name == "high") {
        set_kappas(0.175, 0.1);
        p.ue_adc_bits = p.ue_dac_bits = 3;
        p.bs_adc_bits = p.bs_dac_bits = equal_proportion_bits({1, 2, 3, 4}, num_antennas);
    } else if (name == "severe") {
        set_kappas(0.15, 0.15);
        p.ue_adc_bits = p.ue_dac_bits = 1;
        p.bs_adc_bits = p.bs_dac_bits = equal_proportion_bits({1}, num_antennas);
    } else {
        throw std::invalid_argument("unknown hardware preset '" + name + "'");
    }
    return p;
}

SystemConfig ExperimentConfig::system() const {
    SystemConfig s;
    s.num_cells = cells;
    s.ues_per_cell = ues_per_cell;
    s.num_antennas = bs_antennas;
    s.pilot_len = resolved_pilot_len();
    s.coherence_len = coherence_len;
    s.pilot_power_w = dbm_to_watt(pilot_power_dbm);
    s.noise_power_w = dbm_to_watt(noise_dbm);
    s.downlink_power_w = downlink_power_w;
    s.area_side_m = area_m;
    s.min_bs_ue_dist_m = min_bs_ue_dist_m;
    s.asd_rad = deg_to_rad(asd_deg);
    s.seed = seed;
    return s;
}

HardwareProfile ExperimentConfig::profile() const { return make_preset(preset, bs_antennas); }

MmOptions ExperimentConfig::mm_options() const {
    MmOptions o;
    o.eps = mm_tol;
    o.max_iters = mm_iters;
    return o;
}

void ExperimentConfig::validate() const {
    system().validate();
    profile().validate(bs_antennas);
    if (mc_samples < 1)
        throw std::invalid_argument("mc_samples must be >= 1");
    if (mm_iters < 1)
        throw std::invalid_argument("mm_iters must be >= 1");
    if (!(mm_tol > 0.0))
        throw std::invalid_argument("mm_tol must be positive");
    if (precoders.empty() || schemes.empty())
        throw std::invalid_argument("at least one precoder and one scheme required");
}

void ExperimentConfig::apply_desk_scale() {
    cells = 2;
    ues_per_cell = 2;
    bs_antennas = 16;
    pilot_len = 0;
    mc_samples = 500;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T, typename F>
std::string join_names(const std::vector<T>& items, F&& to_name) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += ",";
        out += to_name(items[i]);
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string ExperimentConfig::serialize() const {
    std::ostringstream os;
    os << "preset=" << preset << "\n";
    os << "seed=" << seed << "\n";
    os << "cells=" << cells << "\n";
    os << "ues_per_cell=" << ues_per_cell << "\n";
    os << "bs_antennas=" << bs_antennas << "\n";
    os << "pilot_len=" << resolved_pilot_len() << "\n";
    os << "coherence_len=" << coherence_len << "\n";
    os << "pilot_power_dbm=" << fmt_double(pilot_power_dbm) << "\n";
    os << "noise_dbm=" << fmt_double(noise_dbm) << "\n";
    os << "downlink_power_w=" << fmt_double(downlink_power_w) << "\n";
    os << "area_m=" << fmt_double(area_m) << "\n";
    os << "min_bs_ue_dist_m=" << fmt_double(min_bs_ue_dist_m) << "\n";
    os << "asd_deg=" << fmt_double(asd_deg) << "\n";
    os << "mc_samples=" << mc_samples << "\n";
    os << "mm_iters=" << mm_iters << "\n";
    os << "mm_tol=" << fmt_double(mm_tol) << "\n";
    os << "threads=" << threads << "\n";
    os << "precoders=" << join_names(precoders, [](PrecoderKind k) { return to_string(k); })
       << "\n";
    os << "schemes=" << join_names(schemes, [](Scheme s) { return to_string(s); }) << "\n";
    os << "output=" << output << "\n";
    return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        // trim
        const size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        const size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "preset")
                cfg.preset = val;
            else if (key == "seed")
                cfg.seed = std::stoull(val);
            else if (key == "cells")
                cfg.cells = std::stoi(val);
            else if (key == "ues_per_cell")
                cfg.ues_per_cell = std::stoi(val);
            else if (key == "bs_antennas")
                cfg.bs_antennas = std::stoi(val);
            else if (key == "pilot_len")
                cfg.pilot_len = std::stoi(val);
            else if (key == "coherence_len")
                cfg.coherence_len = std::stoi(val);
            else if (key == "pilot_power_dbm")
                cfg.pilot_power_dbm = std::stod(val);
            else if (key == "noise_dbm")
                cfg.noise_dbm = std::stod(val);
            else if (key == "downlink_power_w")
                cfg.downlink_power_w = std::stod(val);
            else if (key == "area_m")
                cfg.area_m = std::stod(val);
            else if (key == "min_bs_ue_dist_m")
                cfg.min_bs_ue_dist_m = std::stod(val);
            else if (key == "asd_deg")
                cfg.asd_deg = std::stod(val);
            else if (key == "mc_samples")
                cfg.mc_samples = std::stoi(val);
            else if (key == "mm_iters")
                cfg.mm_iters = std::stoi(val);
            else if (key == "mm_tol")
                cfg.mm_tol = std::stod(val);
            else if (key == "threads")
                cfg.threads = std::stoi(val);
            else if (key == "precoders") {
                cfg.precoders.clear();
                for (const std::string& p : split_csv(val))
                    cfg.precoders.push_back(precoder_from_string(p));
            } else if (key == "schemes") {
                cfg.schemes.clear();
                for (const std::string& s : split_csv(val))
                    cfg.schemes.push_back(scheme_from_string(s));
            } else if (key == "output")
                cfg.output = val;
            else
                throw std::invalid_argument("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception& ex) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " +
                                        ex.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const std::exception& ex) {
        throw std::invalid_argument(path + ": " + ex.what());
    }
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << "scheme,precoder,preset,seed,per_ue_se_bits_hz,sum_se_bits_hz,mm_iters,runtime_s\n";
    char buf[64];
    for (const ResultRow& r : rows) {
        os << r.scheme << "," << r.precoder << "," << r.preset << "," << r.seed << ",";
        for (size_t i = 0; i < r.per_ue_se.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", r.per_ue_se[i]);
            os << (i ? ";" : "") << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", r.sum_se);
        os << "," << buf << "," << r.mm_iters << ",";
        std::snprintf(buf, sizeof(buf), "%.3f", r.runtime_s);
        os << buf << "\n";
    }
    return os.str();
}

namespace {

std::string trace_path(const std::string& output, const std::string& precoder) {
    std::string base = output;
    const std::string suffix = ".csv";
    if (base.size() >= suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
        base.erase(base.size() - suffix.size());
    return base + "." + precoder + ".trace.csv";
}

} // namespace

std::pair<LsfpWeights, MmTrace> optimize_single_layer(const SinrTerms& terms, double rho_d,
                                                      const MmOptions& options,
                                                      const LsfpWeights* hint) {
    MmOptions opts = options;
    opts.block_diagonal = true;
    auto best = mm_optimize(terms, slp_equal_power(terms.L, terms.K, rho_d), opts);
    if (hint) {
        LsfpWeights diag = *hint;
        project_feasible(diag.gamma, diag.rho_d, /*block_diagonal=*/true);
        auto alt = mm_optimize(terms, diag, opts);
        if (sum_se(terms, alt.first) > sum_se(terms, best.first))
            best = std::move(alt);
    }
    return best;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const SystemConfig sys = config.system();
    const HardwareProfile hw = config.profile();
    const Scenario scenario = generate_network(sys);

    std::vector<ResultRow> rows;
    for (PrecoderKind kind : config.precoders) {
        try {
            const MonteCarloEngine engine(scenario, hw, kind);
            const SinrTerms terms =
                estimate_sinr_terms(engine, config.mc_samples, sys.seed, config.threads);
            const LsfpWeights equal =
                slp_equal_power(sys.num_cells, sys.ues_per_cell, sys.downlink_power_w);

            // full two-layer optimization, then the single-layer baseline
            // (per-cell power allocation) with the full solution as a second
            // start for the restricted problem
            auto [lsfp_weights, lsfp_trace] = mm_optimize(terms, equal, config.mm_options());
            int lsfp_iters = static_cast<int>(lsfp_trace.iters.size());
            auto [slp_weights, slp_trace] =
                optimize_single_layer(terms, sys.downlink_power_w, config.mm_options(),
                                      &lsfp_weights);
            // the single-layer set is nested in the LSFP set; if the
            // equal-power start lost to the single-layer optimum, restart
            // from there
            if (sum_se(terms, lsfp_weights) < sum_se(terms, slp_weights)) {
                auto [opt2, trace2] =
                    mm_optimize(terms, slp_weights, config.mm_options());
                lsfp_weights = opt2;
                lsfp_iters += static_cast<int>(trace2.iters.size());
            }
            if (!config.output.empty() &&
                std::find(config.schemes.begin(), config.schemes.end(), Scheme::kLsfp) !=
                    config.schemes.end()) {
                std::ofstream tf(trace_path(config.output, to_string(kind)));
                tf << lsfp_trace.to_csv();
            }

            for (Scheme scheme : config.schemes) {
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    ResultRow row;
                    row.scheme = to_string(scheme);
                    row.precoder = to_string(kind);
                    row.preset = config.preset;
                    row.seed = sys.seed;

                    LsfpWeights weights = slp_weights;
                    if (scheme == Scheme::kSlp) {
                        row.mm_iters = static_cast<int>(slp_trace.iters.size());
                    } else {
                        weights = lsfp_weights;
                        row.mm_iters = lsfp_iters;
                    }
                    const arma::mat sinr = sinr_closed_form(terms, weights);
                    row.sum_se = 0.0;
                    for (int l = 0; l < sys.num_cells; ++l)
                        for (int k = 0; k < sys.ues_per_cell; ++k) {
                            const double se = terms.prelog * std::log2(1.0 + sinr(l, k));
                            row.per_ue_se.push_back(se);
                            row.sum_se += se;
                        }
                    row.runtime_s =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    rows.push_back(std::move(row));
                } catch (const std::exception& ex) {
                    std::cerr << "combination " << to_string(scheme) << "/" << to_string(kind)
                              << " failed: " << ex.what() << "\n";
                }
            }
        } catch (const std::exception& ex) {
            std::cerr << "precoder " << to_string(kind) << " failed: " << ex.what() << "\n";
        }
    }

    if (!config.output.empty()) {
        std::ofstream out(config.output);
        if (!out)
            throw std::runtime_error("cannot write output file '" + config.output + "'");
        out << results_to_csv(rows);
    }
    return rows;
}

} // namespace lsfp
