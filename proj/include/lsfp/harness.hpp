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

#ifndef LSFP_HARNESS_HPP
#define LSFP_HARNESS_HPP

#include <string>
#include <vector>

#include "lsfp/optimizer.hpp"

namespace lsfp {

enum class Scheme { kSlp, kLsfp };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// Named hardware presets: ideal, low, moderate, high, severe.
HardwareProfile make_preset(const std::string& name, int num_antennas);
const std::vector<std::string>& preset_names();

/// One experiment: a hardware preset plus system dimensions, the precoders
/// and schemes to sweep, and Monte-Carlo/MM settings. Parsed from and
/// serialized to a key=value text file; serialize(parse(x)) is the canonical
/// form and parsing rejects unknown keys.
struct ExperimentConfig {
    std::string preset = "moderate";

    int cells = 4;
    int ues_per_cell = 5;
    int bs_antennas = 100;
    int pilot_len = 0; // 0 resolves to ues_per_cell
    int coherence_len = 200;
    double pilot_power_dbm = 23.0;
    double noise_dbm = -96.0;
    double downlink_power_w = 1.0;
    double area_m = 1000.0;
    double min_bs_ue_dist_m = 35.0;
    double asd_deg = 30.0;

    int mc_samples = 500;
    int mm_iters = 50;
    double mm_tol = 1e-4;
    int threads = 0; // 0 = hardware default
    std::uint64_t seed = 1;

    std::vector<PrecoderKind> precoders = {PrecoderKind::kMr, PrecoderKind::kDuMmse,
                                           PrecoderKind::kDaMmse};
    std::vector<Scheme> schemes = {Scheme::kSlp, Scheme::kLsfp};
    std::string output = "results.csv";

    int resolved_pilot_len() const { return pilot_len > 0 ? pilot_len : ues_per_cell; }
    SystemConfig system() const;
    HardwareProfile profile() const;
    MmOptions mm_options() const;

    void validate() const;
    std::string serialize() const;

    /// CI-scale dimensions: L=2, M=16, K=2.
    void apply_desk_scale();
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct ResultRow {
    std::string scheme;
    std::string precoder;
    std::string preset;
    std::uint64_t seed = 0;
    std::vector<double> per_ue_se; // bits/s/Hz, UEs in (l,k) row-major order
    double sum_se = 0.0;
    int mm_iters = 0;
    double runtime_s = 0.0;
};

/// Best single-layer (block-diagonal) weights: restricted MM from the
/// equal-power split and, when a hint is given, from the hint's diagonal.
/// The restricted problem has its own local optima, so the multi-start
/// matters for a fair SLP baseline.
std::pair<LsfpWeights, MmTrace> optimize_single_layer(const SinrTerms& terms, double rho_d,
                                                      const MmOptions& options,
                                                      const LsfpWeights* hint = nullptr);

std::string results_to_csv(const std::vector<ResultRow>& rows);

/// Runs every (precoder, scheme) combination: scenario -> statistics -> MC
/// terms -> weights -> SE. The SLP rows carry the optimized single-layer
/// power allocation (block-diagonal restriction of the same MM machinery);
/// the LSFP rows carry the full two-layer optimum, warm-restarted from the
/// single-layer point whenever the equal-power start loses to it, so
/// LSFP >= SLP holds row-wise by monotonicity. Writes the CSV to
/// config.output (if nonempty) and MM traces to sibling files. A failing
/// combination is reported on stderr and skipped.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

} // namespace lsfp

#endif
