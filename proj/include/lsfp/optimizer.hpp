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

#ifndef LSFP_OPTIMIZER_HPP
#define LSFP_OPTIMIZER_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lsfp/performance.hpp"

namespace lsfp {

/// Lemma-style ratio minorizer: A/B >= 2*y*sqrt(A) - y^2*B with the
/// multiplier fixed at the expansion point, y = sqrt(A_t)/B_t. Tight there.
struct RatioSurrogate {
    double multiplier = 0.0;
    double lower_bound(double a_val, double b_val) const {
        return 2.0 * multiplier * std::sqrt(a_val) - multiplier * multiplier * b_val;
    }
};

RatioSurrogate ratio_surrogate(double a_at, double b_at);

/// Affine minorizer of |b^H gamma| (= sqrt(gamma' Re(b b^H) gamma) for real
/// gamma) around gamma_t: tangent from below since the norm is convex.
struct AffineForm {
    arma::vec coef;
    double offset = 0.0;
    bool degenerate = false; // expansion value was zero; falls back to the zero bound
    double eval(const arma::vec& g) const { return offset + arma::dot(coef, g); }
};

AffineForm linearize_norm(const arma::cx_vec& b, const arma::vec& gamma_t);

/// First-order expansion of the bilinear product x_r * x_rp at the expansion
/// pair; tight there, bound direction depends on the use site.
struct BilinearSurrogate {
    double gt_r = 0.0, gt_rp = 0.0;
    double eval(double x_r, double x_rp) const { return gt_r * x_rp + gt_rp * x_r - gt_r * gt_rp; }
};

BilinearSurrogate linearize_product(double gt_r, double gt_rp);

/// Sum-SE objective over real nonnegative LSFP weights, built once from the
/// Monte-Carlo terms.
class SeObjective {
  public:
    explicit SeObjective(const SinrTerms& terms) : q_(build_quadratics(terms)) {}
    explicit SeObjective(SinrQuadratics q) : q_(std::move(q)) {}

    double value(const arma::cube& gamma) const;
    arma::cube gradient(const arma::cube& gamma) const;
    const SinrQuadratics& quadratics() const { return q_; }

  private:
    SinrQuadratics q_;
};

/// Concave minorizer of the sum SE at one expansion point: the ratio bound
/// decouples the fractions, the norm is linearized from below in the
/// numerator and the concave desired-power block of each denominator is
/// linearized from above; the PSD interference forms stay exact. Evaluates to
/// -inf where the inner expression drops to -1 or below.
class Surrogate {
  public:
    Surrogate(const SeObjective& objective, const arma::cube& gamma_t);

    double value(const arma::cube& gamma) const;
    arma::cube gradient(const arma::cube& gamma) const;
    const arma::cube& expansion_point() const { return gamma_t_; }

  private:
    const SinrQuadratics* q_;
    arma::cube gamma_t_;
    arma::mat z_;                       // (l,k) ratio multipliers
    arma::mat sqrt_qt_;                 // (l,k) sqrt(gamma_t' M gamma_t)
    std::vector<arma::vec> m_gamma_t_;  // (l,k): M(l,k) * gamma_t block
    friend struct SurrogateTestAccess;
};

/// Projection onto {gamma >= 0, per-BS power <= rho_d}: clip negatives, then
/// rescale each violating BS block onto its sphere. This order is the exact
/// Euclidean projection for the orthant-ball intersection. With
/// block_diagonal set, the cross-cell coefficients gamma(l,k,r), r != l are
/// pinned to zero first (single-layer restriction).
void project_feasible(arma::cube& gamma, double rho_d, bool block_diagonal = false);

struct PgaResult {
    arma::cube point;
    int steps = 0;
    bool line_search_ok = true;
};

/// Projected gradient ascent (with Nesterov momentum and backtracking line
/// search) over the per-BS power balls. Generic in the objective so concave
/// test problems can drive it directly.
PgaResult solve_subproblem(const std::function<double(const arma::cube&)>& value,
                           const std::function<arma::cube(const arma::cube&)>& gradient,
                           const arma::cube& start, double rho_d, double tol,
                           int max_steps = 500, double max_step_norm = 0.0,
                           bool block_diagonal = false);

struct MmOptions {
    double eps = 1e-4;    // stop when ||gamma_{t+1} - gamma_t|| <= eps
    int max_iters = 50;
    double inner_tol = 1e-7;
    int inner_max_steps = 500;
    bool accelerate = true;         // monotone step-lengthening plus direct-ascent polish
    bool block_diagonal = false;    // restrict to single-layer (per-cell power) weights
    bool validate = false;          // check tangency/gradient/minorization per iteration
    std::uint64_t validate_seed = 0x5eed;
};

struct MmIterRecord {
    int iter = 0;
    double objective = 0.0;        // f_SE after the iteration, bits/s/Hz
    double max_power_slack = 0.0;  // max over BS of (power - rho_d)
    int inner_steps = 0;
    double wall_s = 0.0;
    double step_norm = 0.0;
};

struct MmTrace {
    std::vector<MmIterRecord> iters;
    bool converged = false;
    std::string to_csv() const;
};

/// Alternates surrogate construction and concave subproblem solves from a
/// feasible start until the iterate movement drops below eps. The objective
/// trace is monotone; a decrease beyond 1e-9 aborts (bug trap).
std::pair<LsfpWeights, MmTrace> mm_optimize(const SinrTerms& terms, const LsfpWeights& init,
                                            const MmOptions& options = {});

} // namespace lsfp

#endif
