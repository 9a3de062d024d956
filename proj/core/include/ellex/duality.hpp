#pragma once

#include <span>
#include <vector>

#include "ellex/sampling.hpp"
#include "ellex/theta.hpp"
#include "ellex/thetap.hpp"

namespace ellex {

/// The canonical element Delta_{n,k} pairing Theta_{n/k} with
/// Theta_{n/(n-k)}: explicit theta product on one side, expansion through
/// the two w bases on the other.
struct DualityPair {
  WBasis primal;       // basis of Theta_{n/k}
  WBasis dual;         // basis of Theta_{n/(n-k)}
  ThetaSeries series;  // scalar theta evaluations for the product formula
  cplx c = 0.0;        // fitted proportionality constant, 0 until fit_c

  long n() const { return primal.n(); }
};

DualityPair make_duality_pair(const CFrac& c, const Lattice& l, int B = 0);

/// The explicit product formula; min_factor (if given) receives the
/// smallest |theta factor| seen, for pole guards in samplers.
cplx delta_product(const DualityPair& pair, std::span<const cplx> z,
                   std::span<const cplx> zp, double* min_factor = nullptr);

/// Sum side of the expansion: sum_alpha w_alpha(z) w_{1-alpha}(zp).
cplx delta_w_sum(const DualityPair& pair, std::span<const cplx> z,
                 std::span<const cplx> zp);

/// Worst relative residual of the 1- and tau-shift laws of the product, over
/// all p + p' variables.
double delta_qp_residual(const DualityPair& pair, std::span<const cplx> z,
                         std::span<const cplx> zp);

/// Simultaneous shift z_a += d(n_1..n_{a-1})/n, zp_b += d(n_1'..n_{b-1}')/n
/// multiplies Delta by E(1/n): relative residual.
double delta_r_shift_residual(const DualityPair& pair, std::span<const cplx> z,
                              std::span<const cplx> zp);

/// Same shift scaled by tau multiplies Delta by E(tau/n - z_p - zp_{p'}).
double delta_r_tau_shift_residual(const DualityPair& pair, std::span<const cplx> z,
                                  std::span<const cplx> zp);

struct FitResult {
  cplx c = 0.0;
  double residual = 0.0;  // worst relative residual at the fit samples
};

/// Least-squares scalar fit of c over guarded random samples; stores c into
/// the pair and reports the worst relative residual at the fit points.
FitResult fit_c(DualityPair& pair, Sampler& sampler, int samples = 24);

/// Full expansion of Delta over w_alpha (x) w_beta: n^2 coefficients by
/// least squares at >= 2 n^2 guarded samples. Row index alpha, column beta.
std::vector<std::vector<cplx>> expand_lambda(const DualityPair& pair,
                                             Sampler& sampler, int samples = 0);

/// Draw a guarded sample (z, zp): all theta factors of the product bounded
/// away from zero.
std::pair<std::vector<cplx>, std::vector<cplx>> guarded_sample(
    const DualityPair& pair, Sampler& sampler, double guard = 1e-6);

}  // namespace ellex
