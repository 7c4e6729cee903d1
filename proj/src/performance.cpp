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

#include "lsfp/performance.hpp"

#include <cstdio>
#include <sstream>
#include <thread>

namespace lsfp {

namespace {

int resolve_threads(int threads) {
    if (threads > 0)
        return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min<unsigned>(hw == 0 ? 1 : hw, 8));
}

/// Runs work(chunk_index, begin, end) over [0, n) split into `threads`
/// contiguous spans. Partial results must be combined by the caller in chunk
/// order so the reduction sequence is independent of scheduling.
template <typename Work>
void run_chunked(int n, int threads, Work&& work) {
    const int t = std::min(threads, std::max(n, 1));
    if (t <= 1) {
        work(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    const int base = n / t, extra = n % t;
    int begin = 0;
    for (int c = 0; c < t; ++c) {
        const int len = base + (c < extra ? 1 : 0);
        pool.emplace_back([&work, c, begin, len] { work(c, begin, begin + len); });
        begin += len;
    }
    for (auto& th : pool)
        th.join();
}

arma::cx_vec real_to_cx(const arma::vec& v) {
    return arma::cx_vec(v, arma::vec(v.n_elem, arma::fill::zeros));
}

} // namespace

// ---------------------------------------------------------------- weights

double LsfpWeights::max_power_slack() const {
    double slack = -arma::datum::inf;
    for (arma::uword r = 0; r < gamma.n_slices; ++r)
        slack = std::max(slack, bs_power(int(r)) - rho_d);
    return slack;
}

bool LsfpWeights::feasible(double tol) const {
    if (gamma.min() < -tol)
        return false;
    return max_power_slack() <= tol;
}

LsfpWeights slp_weights(const arma::mat& powers, double rho_d) {
    const int L = int(powers.n_rows);
    const int K = int(powers.n_cols);
    if (powers.min() < 0.0)
        throw std::invalid_argument("slp_weights: negative power");
    LsfpWeights w;
    w.rho_d = rho_d;
    w.gamma.zeros(L, K, L);
    for (int l = 0; l < L; ++l) {
        double cell = 0.0;
        for (int k = 0; k < K; ++k) {
            cell += powers(l, k);
            w.gamma(l, k, l) = std::sqrt(powers(l, k));
        }
        if (cell > rho_d * (1.0 + 1e-12))
            throw std::invalid_argument("slp_weights: cell power exceeds the per-BS budget");
    }
    return w;
}

LsfpWeights slp_equal_power(int L, int K, double rho_d) {
    return slp_weights(arma::mat(L, K, arma::fill::value(rho_d / K)), rho_d);
}

// ------------------------------------------------------------- quadratics

SinrQuadratics build_quadratics(const SinrTerms& terms) {
    SinrQuadratics q;
    q.L = terms.L;
    q.K = terms.K;
    q.prelog = terms.prelog;
    q.a = terms.alpha_a;
    q.noise = terms.alpha_a * terms.sigma2;
    q.interf_coef = terms.alpha_a * (1.0 + terms.kappa_ru * terms.kappa_ru);
    q.m_desired.resize(size_t(q.L) * q.K);
    q.t_interf.resize(size_t(q.L) * q.K * q.K);
    for (int l = 0; l < q.L; ++l) {
        for (int k = 0; k < q.K; ++k) {
            const arma::cx_vec& b = terms.b(l, k);
            q.m_desired[size_t(l) * q.K + k] = arma::real(b * b.t());
            for (int kp = 0; kp < q.K; ++kp) {
                arma::mat t = arma::real(terms.c(l, k, kp));
                t = 0.5 * (t + t.t());
                t.diag() += terms.e(l, k, kp) +
                            terms.kappa_tb * terms.kappa_tb * terms.f(l, k, kp);
                q.t_interf[(size_t(l) * q.K + k) * q.K + kp] = t;
            }
        }
    }
    return q;
}

double SinrQuadratics::numerator(int l, int k, const arma::cube& g) const {
    const arma::vec glk = arma::vectorise(g.tube(l, k));
    return a * a * arma::as_scalar(glk.t() * M(l, k) * glk);
}

double SinrQuadratics::denominator(int l, int k, const arma::cube& g) const {
    double interf = 0.0;
    for (int kp = 0; kp < K; ++kp) {
        const arma::mat& t = T(l, k, kp);
        for (int n = 0; n < L; ++n) {
            const arma::vec gn = arma::vectorise(g.tube(n, kp));
            interf += arma::as_scalar(gn.t() * t * gn);
        }
    }
    return interf_coef * interf + noise - numerator(l, k, g);
}

arma::mat sinr_closed_form(const SinrTerms& terms, const LsfpWeights& weights) {
    const SinrQuadratics q = build_quadratics(terms);
    arma::mat sinr(q.L, q.K);
    for (int l = 0; l < q.L; ++l) {
        for (int k = 0; k < q.K; ++k) {
            const double num = q.numerator(l, k, weights.gamma);
            const double den = q.denominator(l, k, weights.gamma);
            if (!(den > 0.0))
                throw std::runtime_error("sinr_closed_form: nonpositive denominator, "
                                         "inconsistent Monte-Carlo terms");
            sinr(l, k) = num / den;
        }
    }
    return sinr;
}

double sum_se(const SinrTerms& terms, const LsfpWeights& weights) {
    const arma::mat sinr = sinr_closed_form(terms, weights);
    double se = 0.0;
    for (arma::uword i = 0; i < sinr.n_elem; ++i)
        se += std::log2(1.0 + sinr(i));
    return terms.prelog * se;
}

// ----------------------------------------------------------------- engine

MonteCarloEngine::MonteCarloEngine(const Scenario& scenario, const HardwareProfile& profile,
                                   PrecoderKind kind)
    : scenario_(scenario), profile_(profile), kind_(kind) {
    stats_ = build_channel_statistics(scenario_);
    bussgang_ = build_bussgang_matrices(profile_, scenario_.config.num_antennas);
    estimator_ = std::make_unique<Estimator>(stats_, bussgang_, profile_, scenario_.config);
    precoder_ =
        std::make_unique<LocalPrecoder>(kind_, stats_, *estimator_, bussgang_, profile_,
                                        scenario_.config);
}

void MonteCarloEngine::realize(std::uint64_t seed, std::uint64_t index, Realization& out) const {
    const int L = scenario_.config.num_cells;
    const int K = scenario_.config.ues_per_cell;
    const int M = scenario_.config.num_antennas;

    if (out.h.num_cells() != L || out.h.ues_per_cell() != K)
        out.h = ChannelGrid(L, K);
    for (int l = 0; l < L; ++l)
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < L; ++j) {
                Rng rng = make_stream(seed, {stream_tag::kChannel, index, std::uint64_t(l),
                                             std::uint64_t(k), std::uint64_t(j)});
                out.h.at(l, k, j) = sample_channel(stats_.at(l, k, j), rng).h;
            }

    Rng pilot_rng = make_stream(seed, {stream_tag::kPilotNoise, index});
    out.pilots = estimator_->simulate_pilots(out.h, pilot_rng);

    out.h_hat.assign(L, arma::cx_mat(M, K));
    out.v.resize(L);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k)
            out.h_hat[l].col(k) = estimator_->estimate(l, k, l, out.pilots.at(l, k));
        out.v[l] = precoder_->directions(l, out.h_hat[l]);
    }
}

// ------------------------------------------------------------ term estimation

namespace {

struct TermAccum {
    arma::mat norm_sq;
    std::vector<arma::cx_vec> b;
    std::vector<arma::cx_mat> c;
    std::vector<arma::vec> e, f;

    TermAccum(int L, int K) {
        norm_sq.zeros(L, K);
        b.assign(size_t(L) * K, arma::cx_vec(L, arma::fill::zeros));
        c.assign(size_t(L) * K * K, arma::cx_mat(L, L, arma::fill::zeros));
        e.assign(size_t(L) * K * K, arma::vec(L, arma::fill::zeros));
        f.assign(size_t(L) * K * K, arma::vec(L, arma::fill::zeros));
    }

    void add(const TermAccum& o) {
        norm_sq += o.norm_sq;
        for (size_t i = 0; i < b.size(); ++i)
            b[i] += o.b[i];
        for (size_t i = 0; i < c.size(); ++i) {
            c[i] += o.c[i];
            e[i] += o.e[i];
            f[i] += o.f[i];
        }
    }
};

} // namespace

SinrTerms estimate_sinr_terms(const MonteCarloEngine& engine, int n_mc, std::uint64_t seed,
                              int threads) {
    if (n_mc < 1)
        throw std::invalid_argument("estimate_sinr_terms: n_mc must be >= 1");
    const SystemConfig& cfg = engine.config();
    const int L = cfg.num_cells, K = cfg.ues_per_cell;
    const arma::vec& a_dac = engine.bussgang().a_dac;
    const arma::vec& b_dac = engine.bussgang().b_dac;
    const arma::cx_vec a_dac_cx = real_to_cx(a_dac);

    const int nt = resolve_threads(threads);
    std::vector<TermAccum> parts(size_t(std::min(nt, std::max(n_mc, 1))), TermAccum(L, K));

    run_chunked(n_mc, nt, [&](int chunk, int begin, int end) {
        TermAccum& acc = parts[chunk];
        MonteCarloEngine::Realization r;
        std::vector<arma::cx_mat> vd(L);
        std::vector<arma::mat> vsq(L);
        for (int t = begin; t < end; ++t) {
            engine.realize(seed, std::uint64_t(t), r);
            for (int bs = 0; bs < L; ++bs) {
                vd[bs] = r.v[bs];
                vd[bs].each_col() %= a_dac_cx;
                vsq[bs] = arma::square(arma::abs(r.v[bs]));
                for (int kp = 0; kp < K; ++kp)
                    acc.norm_sq(bs, kp) += arma::accu(vsq[bs].col(kp));
            }
            for (int l = 0; l < L; ++l) {
                for (int k = 0; k < K; ++k) {
                    arma::cx_mat phi(L, K);
                    for (int bs = 0; bs < L; ++bs)
                        phi.row(bs) = arma::conj(vd[bs].t() * r.h.at(l, k, bs)).st();
                    acc.b[size_t(l) * K + k] += phi.col(k);
                    for (int kp = 0; kp < K; ++kp)
                        acc.c[(size_t(l) * K + k) * K + kp] += phi.col(kp) * phi.col(kp).t();
                    for (int bs = 0; bs < L; ++bs) {
                        const arma::vec habs = arma::square(arma::abs(r.h.at(l, k, bs)));
                        const arma::vec he = b_dac % habs;
                        const arma::vec hf = a_dac % habs;
                        for (int kp = 0; kp < K; ++kp) {
                            acc.e[(size_t(l) * K + k) * K + kp](bs) +=
                                arma::dot(he, vsq[bs].col(kp));
                            acc.f[(size_t(l) * K + k) * K + kp](bs) +=
                                arma::dot(hf, vsq[bs].col(kp));
                        }
                    }
                }
            }
        }
    });

    for (size_t i = 1; i < parts.size(); ++i)
        parts[0].add(parts[i]);
    TermAccum& acc = parts[0];

    SinrTerms terms;
    terms.L = L;
    terms.K = K;
    terms.prelog = double(cfg.coherence_len - cfg.pilot_len) / double(cfg.coherence_len);
    terms.sigma2 = cfg.noise_power_w;
    terms.alpha_a = engine.bussgang().alpha_a_ue;
    terms.kappa_ru = engine.profile().kappa_ru;
    terms.kappa_tb = engine.profile().kappa_tb;

    const double inv_n = 1.0 / double(n_mc);
    terms.omega = 1.0 / arma::sqrt(acc.norm_sq * inv_n);

    terms.b_terms.resize(size_t(L) * K);
    terms.c_terms.resize(size_t(L) * K * K);
    terms.e_terms.resize(size_t(L) * K * K);
    terms.f_terms.resize(size_t(L) * K * K);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            arma::cx_vec b = acc.b[size_t(l) * K + k] * inv_n;
            for (int r = 0; r < L; ++r)
                b(r) *= terms.omega(r, k);
            terms.b_terms[size_t(l) * K + k] = b;
            for (int kp = 0; kp < K; ++kp) {
                arma::cx_mat c = acc.c[(size_t(l) * K + k) * K + kp] * inv_n;
                arma::vec e = acc.e[(size_t(l) * K + k) * K + kp] * inv_n;
                arma::vec f = acc.f[(size_t(l) * K + k) * K + kp] * inv_n;
                for (int r = 0; r < L; ++r) {
                    e(r) *= terms.omega(r, kp) * terms.omega(r, kp);
                    f(r) *= terms.omega(r, kp) * terms.omega(r, kp);
                    for (int rp = 0; rp < L; ++rp)
                        c(r, rp) *= terms.omega(r, kp) * terms.omega(rp, kp);
                }
                terms.c_terms[(size_t(l) * K + k) * K + kp] = c;
                terms.e_terms[(size_t(l) * K + k) * K + kp] = e;
                terms.f_terms[(size_t(l) * K + k) * K + kp] = f;
            }
        }
    }
    return terms;
}

// --------------------------------------------------------- downlink oracle

arma::mat mc_validate_sinr(const MonteCarloEngine& engine, const LsfpWeights& weights,
                           const arma::mat& omega, int n_mc, std::uint64_t seed,
                           int symbols_per_realization, int threads) {
    const SystemConfig& cfg = engine.config();
    const int L = cfg.num_cells, K = cfg.ues_per_cell;
    const double sigma2 = cfg.noise_power_w;
    const double alpha_a = engine.bussgang().alpha_a_ue;
    const double kappa_ru = engine.profile().kappa_ru;
    const double kappa_tb = engine.profile().kappa_tb;
    const arma::vec& a_dac = engine.bussgang().a_dac;
    const arma::vec& b_dac = engine.bussgang().b_dac;
    const arma::cx_vec a_dac_cx = real_to_cx(a_dac);
    const arma::vec tb_coef = kappa_tb * kappa_tb * a_dac;

    struct UeAcc {
        arma::cx_mat cross;
        arma::mat spow, ypow;
        explicit UeAcc(int L_, int K_)
            : cross(L_, K_, arma::fill::zeros), spow(L_, K_, arma::fill::zeros),
              ypow(L_, K_, arma::fill::zeros) {}
        void add(const UeAcc& o) {
            cross += o.cross;
            spow += o.spow;
            ypow += o.ypow;
        }
    };

    // per-BS total LSFP symbol power feeding precoder column (r, k')
    arma::mat lsfp_pow(L, K, arma::fill::zeros);
    for (int r = 0; r < L; ++r)
        for (int kp = 0; kp < K; ++kp)
            for (int n = 0; n < L; ++n)
                lsfp_pow(r, kp) += weights.gamma(n, kp, r) * weights.gamma(n, kp, r);

    const int nt = resolve_threads(threads);
    std::vector<UeAcc> parts(size_t(std::min(nt, std::max(n_mc, 1))), UeAcc(L, K));

    run_chunked(n_mc, nt, [&](int chunk, int begin, int end) {
        UeAcc& acc = parts[chunk];
        MonteCarloEngine::Realization r;
        std::vector<arma::cx_mat> wd(L);
        std::vector<arma::vec> dvec(L), dac_std(L), tb_std(L);
        for (int t = begin; t < end; ++t) {
            engine.realize(seed, std::uint64_t(t), r);
            for (int bs = 0; bs < L; ++bs) {
                arma::cx_mat w = r.v[bs];
                for (int kp = 0; kp < K; ++kp)
                    w.col(kp) *= omega(bs, kp);
                const arma::mat wsq = arma::square(arma::abs(w));
                wd[bs] = w;
                wd[bs].each_col() %= a_dac_cx;
                dvec[bs] = wsq * lsfp_pow.row(bs).t();
                dac_std[bs] = arma::sqrt(b_dac % dvec[bs]);
                tb_std[bs] = arma::sqrt(tb_coef % dvec[bs]);
            }

            // effective symbol channels and conditional distortion powers
            std::vector<arma::cx_mat> gmat(size_t(L) * K);
            arma::mat delta(L, K);
            for (int l = 0; l < L; ++l) {
                for (int k = 0; k < K; ++k) {
                    arma::cx_mat phi(L, K);
                    double pdist = 0.0;
                    for (int bs = 0; bs < L; ++bs) {
                        phi.row(bs) = arma::conj(wd[bs].t() * r.h.at(l, k, bs)).st();
                        pdist += arma::dot((b_dac + tb_coef) % dvec[bs],
                                           arma::square(arma::abs(r.h.at(l, k, bs))));
                    }
                    arma::cx_mat g(L, K, arma::fill::zeros);
                    for (int n = 0; n < L; ++n)
                        for (int kp = 0; kp < K; ++kp)
                            for (int bs = 0; bs < L; ++bs)
                                g(n, kp) += weights.gamma(n, kp, bs) * phi(bs, kp);
                    gmat[size_t(l) * K + k] = g;
                    delta(l, k) = std::pow(arma::norm(g, "fro"), 2) + pdist;
                }
            }

            Rng rng = make_stream(seed, {stream_tag::kDownlink, std::uint64_t(t)});
            for (int sym = 0; sym < symbols_per_realization; ++sym) {
                arma::cx_mat s(L, K);
                for (int n = 0; n < L; ++n)
                    for (int kp = 0; kp < K; ++kp)
                        s(n, kp) = rng.cgaussian();
                std::vector<arma::cx_vec> bs_noise(L);
                for (int bs = 0; bs < L; ++bs)
                    bs_noise[bs] = dac_std[bs] % rng.cgaussian_vec(wd[bs].n_rows) +
                                   tb_std[bs] % rng.cgaussian_vec(wd[bs].n_rows);
                for (int l = 0; l < L; ++l) {
                    for (int k = 0; k < K; ++k) {
                        cx_double y = arma::accu(gmat[size_t(l) * K + k] % s);
                        for (int bs = 0; bs < L; ++bs)
                            y += arma::cdot(r.h.at(l, k, bs), bs_noise[bs]);
                        y += std::sqrt(kappa_ru * kappa_ru * delta(l, k)) * rng.cgaussian();
                        y += std::sqrt(sigma2) * rng.cgaussian();
                        const double eps = (1.0 + kappa_ru * kappa_ru) * delta(l, k) + sigma2;
                        y = alpha_a * y +
                            std::sqrt(alpha_a * (1.0 - alpha_a) * eps) * rng.cgaussian();
                        acc.cross(l, k) += y * std::conj(s(l, k));
                        acc.spow(l, k) += std::norm(s(l, k));
                        acc.ypow(l, k) += std::norm(y);
                    }
                }
            }
        }
    });

    for (size_t i = 1; i < parts.size(); ++i)
        parts[0].add(parts[i]);
    const UeAcc& acc = parts[0];

    const double n_total = double(n_mc) * symbols_per_realization;
    arma::mat sinr(L, K);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            const cx_double m = acc.cross(l, k) / acc.spow(l, k);
            const double rss = acc.ypow(l, k) - std::norm(acc.cross(l, k)) / acc.spow(l, k);
            sinr(l, k) = std::norm(m) / (rss / n_total);
        }
    }
    return sinr;
}

// ---------------------------------------------------------- serialization

std::string SinrTerms::to_text() const {
    std::ostringstream os;
    char buf[128];
    auto putd = [&](double v) {
        std::snprintf(buf, sizeof(buf), " %.17g", v);
        os << buf;
    };
    os << "lsfp-sinr-terms v1\n";
    os << "dims " << L << " " << K << "\n";
    os << "scalars";
    putd(prelog);
    putd(sigma2);
    putd(alpha_a);
    putd(kappa_ru);
    putd(kappa_tb);
    os << "\n";
    for (int r = 0; r < L; ++r)
        for (int k = 0; k < K; ++k) {
            os << "omega " << r << " " << k;
            putd(omega(r, k));
            os << "\n";
        }
    for (int l = 0; l < L; ++l)
        for (int k = 0; k < K; ++k) {
            for (int r = 0; r < L; ++r) {
                os << "b " << l << " " << k << " " << r;
                putd(b(l, k)(r).real());
                putd(b(l, k)(r).imag());
                os << "\n";
            }
            for (int kp = 0; kp < K; ++kp) {
                for (int r = 0; r < L; ++r) {
                    for (int rp = 0; rp < L; ++rp) {
                        os << "c " << l << " " << k << " " << kp << " " << r << " " << rp;
                        putd(c(l, k, kp)(r, rp).real());
                        putd(c(l, k, kp)(r, rp).imag());
                        os << "\n";
                    }
                    os << "e " << l << " " << k << " " << kp << " " << r;
                    putd(e(l, k, kp)(r));
                    os << "\n";
                    os << "f " << l << " " << k << " " << kp << " " << r;
                    putd(f(l, k, kp)(r));
                    os << "\n";
                }
            }
        }
    return os.str();
}

SinrTerms SinrTerms::from_text(const std::string& text) {
    std::istringstream is(text);
    std::string header, version;
    is >> header >> version;
    if (header != "lsfp-sinr-terms" || version != "v1")
        throw std::invalid_argument("SinrTerms::from_text: unrecognized header");
    SinrTerms t;
    std::string tok;
    is >> tok;
    if (tok != "dims")
        throw std::invalid_argument("SinrTerms::from_text: missing dims");
    is >> t.L >> t.K;
    is >> tok;
    if (tok != "scalars")
        throw std::invalid_argument("SinrTerms::from_text: missing scalars");
    is >> t.prelog >> t.sigma2 >> t.alpha_a >> t.kappa_ru >> t.kappa_tb;
    t.omega.zeros(t.L, t.K);
    t.b_terms.assign(size_t(t.L) * t.K, arma::cx_vec(t.L, arma::fill::zeros));
    t.c_terms.assign(size_t(t.L) * t.K * t.K, arma::cx_mat(t.L, t.L, arma::fill::zeros));
    t.e_terms.assign(size_t(t.L) * t.K * t.K, arma::vec(t.L, arma::fill::zeros));
    t.f_terms.assign(size_t(t.L) * t.K * t.K, arma::vec(t.L, arma::fill::zeros));
    while (is >> tok) {
        if (tok == "omega") {
            int r, k;
            double v;
            is >> r >> k >> v;
            t.omega(r, k) = v;
        } else if (tok == "b") {
            int l, k, r;
            double re, im;
            is >> l >> k >> r >> re >> im;
            t.b_terms[size_t(l) * t.K + k](r) = {re, im};
        } else if (tok == "c") {
            int l, k, kp, r, rp;
            double re, im;
            is >> l >> k >> kp >> r >> rp >> re >> im;
            t.c_terms[(size_t(l) * t.K + k) * t.K + kp](r, rp) = {re, im};
        } else if (tok == "e" || tok == "f") {
            int l, k, kp, r;
            double v;
            is >> l >> k >> kp >> r >> v;
            auto& dst = (tok == "e") ? t.e_terms : t.f_terms;
            dst[(size_t(l) * t.K + k) * t.K + kp](r) = v;
        } else {
            throw std::invalid_argument("SinrTerms::from_text: bad record '" + tok + "'");
        }
    }
    return t;
}

} // namespace lsfp
