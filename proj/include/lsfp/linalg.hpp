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

#ifndef LSFP_LINALG_HPP
#define LSFP_LINALG_HPP

#include <armadillo>
#include <stdexcept>
#include <string>

namespace lsfp {

/// Relative eigenvalue clip threshold for numerically PSD matrices.
constexpr double kPsdClipTol = 1e-10;

inline double hermiticity_error(const arma::cx_mat& a) {
    const double n = arma::norm(a, "fro");
    if (n == 0.0)
        return 0.0;
    return arma::norm(a - a.t(), "fro") / n;
}

/// Hermitian square root of a PSD matrix via eigendecomposition. Eigenvalues
/// in [-clip_tol*lambda_max, 0) are treated as rounding noise and clipped to
/// zero; anything more negative throws. Robust in the rank-deficient zero-ASD
/// limit where a Cholesky factorization fails.
inline arma::cx_mat psd_sqrt(const arma::cx_mat& m, const std::string& what = "matrix") {
    if (m.n_rows != m.n_cols)
        throw std::invalid_argument(what + ": square matrix required");
    arma::vec eval;
    arma::cx_mat evec;
    if (!arma::eig_sym(eval, evec, arma::cx_mat(0.5 * (m + m.t()))))
        throw std::runtime_error(what + ": eigendecomposition failed");
    const double lmax = eval.max();
    const double floor = -kPsdClipTol * std::max(lmax, 0.0);
    for (arma::uword i = 0; i < eval.n_elem; ++i) {
        if (eval(i) < floor)
            throw std::runtime_error(what + ": not positive semidefinite (eigenvalue " +
                                     std::to_string(eval(i)) + ")");
        if (eval(i) < 0.0)
            eval(i) = 0.0;
    }
    return evec * arma::diagmat(arma::sqrt(eval)) * evec.t();
}

/// Clips rounding-level negative eigenvalues, errors on genuine indefiniteness.
inline arma::cx_mat psd_clip(const arma::cx_mat& m, const std::string& what = "matrix") {
    arma::vec eval;
    arma::cx_mat evec;
    if (!arma::eig_sym(eval, evec, arma::cx_mat(0.5 * (m + m.t()))))
        throw std::runtime_error(what + ": eigendecomposition failed");
    const double lmax = eval.max();
    const double floor = -kPsdClipTol * std::max(lmax, 0.0);
    if (eval.min() < floor)
        throw std::runtime_error(what + ": not positive semidefinite (eigenvalue " +
                                 std::to_string(eval.min()) + ")");
    eval.transform([](double v) { return v < 0.0 ? 0.0 : v; });
    return evec * arma::diagmat(eval) * evec.t();
}

} // namespace lsfp

#endif
