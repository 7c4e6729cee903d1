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

#include "lsfp/optimizer.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

namespace lsfp {

namespace {

constexpr double kLog2e = 1.4426950408889634;

arma::vec tube_vec(const arma::cube& g, int l, int k) { return arma::vectorise(g.tube(l, k)); }

void add_tube(arma::cube& g, int l, int k, const arma::vec& v, double scale) {
    for (arma::uword r = 0; r < g.n_slices; ++r)
        g(l, k, r) += scale * v(r);
}

} // namespace

RatioSurrogate ratio_surrogate(double a_at, double b_at) {
    if (!(b_at > 0.0))
        throw std::domain_error("ratio_surrogate: denominator must be positive");
    if (a_at < 0.0)
        throw std::domain_error("ratio_surrogate: numerator must be nonnegative");
    return RatioSurrogate{std::sqrt(a_at) / b_at};
}

AffineForm linearize_norm(const arma::cx_vec& b, const arma::vec& gamma_t) {
    const arma::mat m = arma::real(b * b.t());
    const double qt = arma::as_scalar(gamma_t.t() * m * gamma_t);
    AffineForm g1;
    if (!(qt > 0.0)) {
        // |b^H gamma_t| = 0: the zero function still minorizes the norm.
        g1.coef.zeros(gamma_t.n_elem);
        g1.offset = 0.0;
        g1.degenerate = true;
        return g1;
    }
    g1.coef = m * gamma_t / std::sqrt(qt);
    g1.offset = 0.0; // value + slope collapse: g1(gamma) = gamma_t' M gamma / sqrt(qt)
    return g1;
}

BilinearSurrogate linearize_product(double gt_r, double gt_rp) {
    return BilinearSurrogate{gt_r, gt_rp};
}

// ---------------------------------------------------------------- objective

double SeObjective::value(const arma::cube& gamma) const {
    double se = 0.0;
    for (int l = 0; l < q_.L; ++l) {
        for (int k = 0; k < q_.K; ++k) {
            const double num = q_.numerator(l, k, gamma);
            const double den = q_.denominator(l, k, gamma);
            if (!(den > 0.0))
                throw std::runtime_error("SeObjective: nonpositive SINR denominator");
            se += std::log2(1.0 + num / den);
        }
    }
    return q_.prelog * se;
}

arma::cube SeObjective::gradient(const arma::cube& gamma) const {
    arma::cube grad(arma::size(gamma), arma::fill::zeros);
    for (int l = 0; l < q_.L; ++l) {
        for (int k = 0; k < q_.K; ++k) {
            const double num = q_.numerator(l, k, gamma);
            const double den = q_.denominator(l, k, gamma);
            const double chain = q_.prelog * kLog2e / (1.0 + num / den);
            const arma::vec glk = tube_vec(gamma, l, k);
            const arma::vec dnum = 2.0 * q_.a * q_.a * (q_.M(l, k) * glk);
            // d(num/den) = (dnum*den - num*dden)/den^2; dden has the
            // interference part minus dnum on the own block.
            for (int kp = 0; kp < q_.K; ++kp) {
                const arma::mat& t = q_.T(l, k, kp);
                for (int n = 0; n < q_.L; ++n) {
                    const arma::vec gn = tube_vec(gamma, n, kp);
                    const arma::vec dden = 2.0 * q_.interf_coef * (t * gn);
                    add_tube(grad, n, kp, dden, -chain * num / (den * den));
                }
            }
            add_tube(grad, l, k, dnum, chain * (1.0 / den + num / (den * den)));
        }
    }
    return grad;
}

// ---------------------------------------------------------------- surrogate

Surrogate::Surrogate(const SeObjective& objective, const arma::cube& gamma_t)
    : q_(&objective.quadratics()), gamma_t_(gamma_t) {
    z_.zeros(q_->L, q_->K);
    sqrt_qt_.zeros(q_->L, q_->K);
    m_gamma_t_.resize(size_t(q_->L) * q_->K);
    for (int l = 0; l < q_->L; ++l) {
        for (int k = 0; k < q_->K; ++k) {
            const arma::vec glk = tube_vec(gamma_t_, l, k);
            const arma::vec mg = q_->M(l, k) * glk;
            const double qt = arma::dot(glk, mg);
            const double den = q_->denominator(l, k, gamma_t_);
            if (!(den > 0.0))
                throw std::runtime_error("Surrogate: nonpositive denominator at expansion point");
            m_gamma_t_[size_t(l) * q_->K + k] = mg;
            sqrt_qt_(l, k) = std::sqrt(std::max(qt, 0.0));
            // Lemma-style multiplier z = sqrt(N)/D at the expansion point.
            z_(l, k) = q_->a * sqrt_qt_(l, k) / den;
        }
    }
}

double Surrogate::value(const arma::cube& gamma) const {
    double se = 0.0;
    for (int l = 0; l < q_->L; ++l) {
        for (int k = 0; k < q_->K; ++k) {
            const arma::vec glk = tube_vec(gamma, l, k);
            const arma::vec& mg = m_gamma_t_[size_t(l) * q_->K + k];
            const double z = z_(l, k);
            const double sq = sqrt_qt_(l, k);

            // linear minorizer of sqrt(N); zero if the expansion block is dark
            const double g1 = (sq > 0.0) ? q_->a * arma::dot(mg, glk) / sq : 0.0;

            // convex majorizer of D: PSD interference forms kept exact, the
            // concave -N block replaced by its tangent
            double interf = 0.0;
            for (int kp = 0; kp < q_->K; ++kp) {
                const arma::mat& t = q_->T(l, k, kp);
                for (int n = 0; n < q_->L; ++n) {
                    const arma::vec gn = tube_vec(gamma, n, kp);
                    interf += arma::as_scalar(gn.t() * t * gn);
                }
            }
            const double qt_lin = 2.0 * arma::dot(mg, glk) - sq * sq;
            const double d_tilde =
                q_->interf_coef * interf + q_->noise - q_->a * q_->a * qt_lin;

            const double u = 2.0 * z * g1 - z * z * d_tilde;
            if (!(1.0 + u > 0.0))
                return -arma::datum::inf;
            se += std::log2(1.0 + u);
        }
    }
    return q_->prelog * se;
}

arma::cube Surrogate::gradient(const arma::cube& gamma) const {
    arma::cube grad(arma::size(gamma), arma::fill::zeros);
    for (int l = 0; l < q_->L; ++l) {
        for (int k = 0; k < q_->K; ++k) {
            const arma::vec glk = tube_vec(gamma, l, k);
            const arma::vec& mg = m_gamma_t_[size_t(l) * q_->K + k];
            const double z = z_(l, k);
            const double sq = sqrt_qt_(l, k);

            const double g1 = (sq > 0.0) ? q_->a * arma::dot(mg, glk) / sq : 0.0;
            double interf = 0.0;
            for (int kp = 0; kp < q_->K; ++kp) {
                const arma::mat& t = q_->T(l, k, kp);
                for (int n = 0; n < q_->L; ++n) {
                    const arma::vec gn = tube_vec(gamma, n, kp);
                    interf += arma::as_scalar(gn.t() * t * gn);
                }
            }
            const double qt_lin = 2.0 * arma::dot(mg, glk) - sq * sq;
            const double d_tilde =
                q_->interf_coef * interf + q_->noise - q_->a * q_->a * qt_lin;
            const double u = 2.0 * z * g1 - z * z * d_tilde;
            if (!(1.0 + u > 0.0))
                throw std::runtime_error("Surrogate::gradient: evaluated outside the domain");
            const double chain = q_->prelog * kLog2e / (1.0 + u);

            if (sq > 0.0)
                add_tube(grad, l, k, mg, chain * 2.0 * z * q_->a / sq);
            add_tube(grad, l, k, mg, chain * z * z * 2.0 * q_->a * q_->a);
            for (int kp = 0; kp < q_->K; ++kp) {
                const arma::mat& t = q_->T(l, k, kp);
                for (int n = 0; n < q_->L; ++n) {
                    const arma::vec gn = tube_vec(gamma, n, kp);
                    add_tube(grad, n, kp, 2.0 * q_->interf_coef * (t * gn),
                             -chain * z * z);
                }
            }
        }
    }
    return grad;
}

// --------------------------------------------------------------- subproblem

void project_feasible(arma::cube& gamma, double rho_d, bool block_diagonal) {
    if (block_diagonal)
        for (arma::uword r = 0; r < gamma.n_slices; ++r)
            for (arma::uword l = 0; l < gamma.n_rows; ++l)
                if (l != r)
                    gamma.slice(r).row(l).zeros();
    gamma.transform([](double v) { return v < 0.0 ? 0.0 : v; });
    for (arma::uword r = 0; r < gamma.n_slices; ++r) {
        const double p = arma::accu(arma::square(gamma.slice(r)));
        if (p > rho_d)
            gamma.slice(r) *= std::sqrt(rho_d / p);
    }
}

PgaResult solve_subproblem(const std::function<double(const arma::cube&)>& value,
                           const std::function<arma::cube(const arma::cube&)>& gradient,
                           const arma::cube& start, double rho_d, double tol, int max_steps,
                           double max_step_norm, bool block_diagonal) {
    const auto project = [rho_d, block_diagonal](arma::cube& g) {
        project_feasible(g, rho_d, block_diagonal);
    };
    PgaResult res;
    res.point = start;
    project(res.point);
    double fx = value(res.point);
    arma::cube x_prev = res.point;
    double momentum = 1.0; // Nesterov sequence t_k
    double step = 1.0;

    for (res.steps = 0; res.steps < max_steps; ++res.steps) {
        // extrapolated point; fall back to the iterate when it leaves the
        // surrogate domain (restarts the momentum)
        const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        const double beta = (momentum - 1.0) / momentum_next;
        arma::cube y = res.point + beta * (res.point - x_prev);
        double fy = value(y);
        if (!std::isfinite(fy)) {
            y = res.point;
            fy = fx;
            momentum = 1.0;
        } else {
            momentum = momentum_next;
        }
        const arma::cube g = gradient(y);

        // gradient-map stationarity at the current iterate
        {
            const arma::cube gx = (arma::approx_equal(y, res.point, "absdiff", 0.0))
                                      ? g
                                      : gradient(res.point);
            arma::cube probe = res.point + gx;
            project(probe);
            if (std::sqrt(arma::accu(arma::square(probe - res.point))) <= tol)
                break;
        }

        step *= 2.0;
        if (max_step_norm > 0.0) {
            const double gn = std::sqrt(arma::accu(arma::square(g)));
            if (gn > 0.0)
                step = std::min(step, max_step_norm / gn);
        }
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            arma::cube cand = y + step * g;
            project(cand);
            const double fc = value(cand);
            if (std::isfinite(fc) && fc >= fy + 1e-4 * arma::accu(g % (cand - y))) {
                if (fc < fx) {
                    // momentum overshoot: restart from the best iterate
                    momentum = 1.0;
                    arma::cube mono = res.point + step * gradient(res.point);
                    project(mono);
                    const double fm = value(mono);
                    if (std::isfinite(fm) && fm >= fx) {
                        x_prev = res.point;
                        res.point = std::move(mono);
                        fx = fm;
                        accepted = true;
                        break;
                    }
                } else {
                    x_prev = res.point;
                    res.point = std::move(cand);
                    fx = fc;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.line_search_ok = false; // keep the best feasible iterate found
            break;
        }
    }
    return res;
}

// ----------------------------------------------------------------- MM loop

std::string MmTrace::to_csv() const {
    std::ostringstream os;
    os << "iter,objective_bits_hz,max_power_slack,inner_steps,step_norm,wall_s\n";
    char buf[160];
    for (const MmIterRecord& it : iters) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d,%.17g,%.3f\n", it.iter, it.objective,
                      it.max_power_slack, it.inner_steps, it.step_norm, it.wall_s);
        os << buf;
    }
    return os.str();
}

namespace {

arma::cube fd_gradient(const SeObjective& obj, const arma::cube& at, double h) {
    arma::cube grad(arma::size(at), arma::fill::zeros);
    arma::cube x = at;
    for (arma::uword i = 0; i < x.n_elem; ++i) {
        const double step = h * std::max(1.0, std::abs(at(i)));
        x(i) = at(i) + step;
        const double fp = obj.value(x);
        x(i) = at(i) - step;
        const double fm = obj.value(x);
        x(i) = at(i);
        grad(i) = (fp - fm) / (2.0 * step);
    }
    return grad;
}

arma::cube random_feasible(int L, int K, double rho_d, Rng& rng) {
    arma::cube g(L, K, L);
    for (arma::uword i = 0; i < g.n_elem; ++i)
        g(i) = std::abs(rng.gaussian());
    for (int r = 0; r < L; ++r) {
        const double p = arma::accu(arma::square(g.slice(r)));
        const double radius = std::pow(rng.uniform(), 1.0 / double(L * K)) * std::sqrt(rho_d);
        g.slice(r) *= radius / std::sqrt(p);
    }
    return g;
}

void validate_surrogate(const SeObjective& obj, const Surrogate& surr, const arma::cube& gamma_t,
                        double rho_d, Rng& rng) {
    const double f_at = obj.value(gamma_t);
    const double s_at = surr.value(gamma_t);
    if (std::abs(f_at - s_at) > 1e-9)
        throw std::runtime_error("surrogate tangency violated: |f - f_surrogate| = " +
                                 std::to_string(std::abs(f_at - s_at)));

    const arma::cube g_surr = surr.gradient(gamma_t);
    const arma::cube g_fd = fd_gradient(obj, gamma_t, 1e-5);
    const double denom = std::sqrt(arma::accu(arma::square(g_fd)));
    const double diff = std::sqrt(arma::accu(arma::square(g_surr - g_fd)));
    if (denom > 0.0 && diff / denom > 1e-4)
        throw std::runtime_error("surrogate gradient mismatch: relative error " +
                                 std::to_string(diff / denom));

    const int L = int(gamma_t.n_rows), K = int(gamma_t.n_cols);
    for (int i = 0; i < 100; ++i) {
        const arma::cube x = random_feasible(L, K, rho_d, rng);
        const double s = surr.value(x);
        if (std::isfinite(s) && s > obj.value(x) + 1e-8)
            throw std::runtime_error("surrogate fails to minorize at a sampled feasible point");
    }
    // concavity along random feasible segments
    for (int i = 0; i < 20; ++i) {
        const arma::cube x1 = random_feasible(L, K, rho_d, rng);
        const arma::cube x2 = random_feasible(L, K, rho_d, rng);
        const double s1 = surr.value(x1), s2 = surr.value(x2);
        if (!std::isfinite(s1) || !std::isfinite(s2))
            continue;
        const arma::cube mid = 0.5 * (x1 + x2);
        if (surr.value(mid) < 0.5 * (s1 + s2) - 1e-9)
            throw std::runtime_error("surrogate not concave along a sampled segment");
    }
}

} // namespace

std::pair<LsfpWeights, MmTrace> mm_optimize(const SinrTerms& terms, const LsfpWeights& init,
                                            const MmOptions& options) {
    if (!init.feasible(1e-9))
        throw std::invalid_argument("mm_optimize: infeasible initialization");
    if (options.block_diagonal) {
        for (arma::uword r = 0; r < init.gamma.n_slices; ++r)
            for (arma::uword l = 0; l < init.gamma.n_rows; ++l)
                for (arma::uword k = 0; k < init.gamma.n_cols && l != r; ++k)
                    if (init.gamma(l, k, r) != 0.0)
                        throw std::invalid_argument("mm_optimize: block-diagonal restriction "
                                                    "requires a single-layer start");
    }
    const SeObjective obj(terms);
    LsfpWeights w = init;
    MmTrace trace;
    Rng validation_rng(options.validate_seed);

    // One minorize-maximize application: build the surrogate at gamma, solve
    // the concave subproblem, optionally lengthen the move along the MM
    // direction while the true objective improves (monotone, all candidates
    // projected feasible). Returns the plain MM step norm, on which
    // convergence is judged.
    auto mm_step = [&](const arma::cube& gamma, arma::cube& next, double& f_next,
                       int& inner_steps) {
        const Surrogate surr(obj, gamma);
        if (options.validate)
            validate_surrogate(obj, surr, gamma, w.rho_d, validation_rng);
        const PgaResult inner = solve_subproblem(
            [&surr](const arma::cube& g) { return surr.value(g); },
            [&surr](const arma::cube& g) { return surr.gradient(g); }, gamma, w.rho_d,
            options.inner_tol, options.inner_max_steps, 0.0, options.block_diagonal);
        inner_steps = inner.steps;
        next = inner.point;
        f_next = obj.value(next);
        const double step_norm = std::sqrt(arma::accu(arma::square(inner.point - gamma)));
        if (options.accelerate && step_norm > options.eps) {
            const arma::cube dir = inner.point - gamma;
            const double min_gain = 1e-11 * std::max(1.0, std::abs(f_next));
            for (double alpha = 2.0; alpha <= 4096.0; alpha *= 2.0) {
                arma::cube cand = gamma + alpha * dir;
                project_feasible(cand, w.rho_d, options.block_diagonal);
                double fc;
                try {
                    fc = obj.value(cand);
                } catch (const std::runtime_error&) {
                    break;
                }
                if (!(fc > f_next + min_gain))
                    break;
                next = std::move(cand);
                f_next = fc;
            }
        }
        return step_norm;
    };

    double f_prev = obj.value(w.gamma);
    auto record = [&](double f_new, double step_norm, int inner_steps,
                      const std::chrono::steady_clock::time_point& t0) {
        if (f_new < f_prev - 1e-9)
            throw std::runtime_error("mm_optimize: objective decreased by " +
                                     std::to_string(f_prev - f_new) +
                                     ", monotonicity invariant violated");
        MmIterRecord rec;
        rec.iter = int(trace.iters.size()) + 1;
        rec.objective = f_new;
        rec.max_power_slack = w.max_power_slack();
        rec.inner_steps = inner_steps;
        rec.step_norm = step_norm;
        rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.iters.push_back(rec);
        f_prev = f_new;
    };

    while (int(trace.iters.size()) < options.max_iters) {
        // first MM application of the cycle
        auto t0 = std::chrono::steady_clock::now();
        arma::cube g1;
        double f1;
        int inner1;
        const double step1 = mm_step(w.gamma, g1, f1, inner1);
        w.gamma = g1;
        record(f1, step1, inner1, t0);
        if (step1 <= options.eps) {
            trace.converged = true;
            break;
        }
        if (!options.accelerate)
            continue;

        // Polish with projected ascent on the true objective: the surrogate
        // drifts slowly along nearly flat curved valleys, while direct ascent
        // with momentum tracks them. At a stationary point the tangent
        // surrogate is maximized there too, so the next MM step collapses
        // below eps and the standard stopping rule fires.
        const double f_before = f_prev;
        const PgaResult polish = solve_subproblem(
            [&obj](const arma::cube& g) {
                try {
                    return obj.value(g);
                } catch (const std::runtime_error&) {
                    return -arma::datum::inf;
                }
            },
            [&obj](const arma::cube& g) { return obj.gradient(g); }, w.gamma, w.rho_d,
            options.inner_tol, options.inner_max_steps, 0.0, options.block_diagonal);
        double f_polish;
        try {
            f_polish = obj.value(polish.point);
        } catch (const std::runtime_error&) {
            f_polish = -arma::datum::inf;
        }
        if (f_polish >= f_before)
            w.gamma = polish.point;
    }
    return {w, trace};
}

} // namespace lsfp
