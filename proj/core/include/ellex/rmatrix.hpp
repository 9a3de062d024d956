#pragma once

#include <vector>

#include "ellex/cfrac.hpp"
#include "ellex/theta.hpp"

namespace ellex {

/// Parameters of the elliptic exchange-relation family: coprime (n,k), the
/// lattice, and the shift eta (kept away from the zeros (1/n)Gamma of the
/// denominator thetas).
struct RMatrixSpec {
  long n = 0;
  long k = 0;
  Lattice lattice;
  cplx eta;
  ThetaSeries series;
  double guard = 1e-4;
};

RMatrixSpec make_rmatrix_spec(long n, long k, const Lattice& l, cplx eta,
                              double guard = 1e-4);

/// Distance from z to the lattice (1/n)(Z + Z tau) — the union of the zero
/// sets of all theta_s, used for pole guards.
double dist_to_nth_lattice(cplx z, cplx tau, long n);

/// Dense n^4 tensor of entries R_{ab}^{cd}(u,v): at(a,b,c,d) is the
/// coefficient of x_d(v) x_c(u) in the exchange of x_a(u) x_b(v).
struct RTensor {
  long n = 0;
  cplx u, v;
  std::vector<cplx> e;

  cplx& at(long a, long b, long c, long d) {
    return e[((a * n + b) * n + c) * n + d];
  }
  cplx at(long a, long b, long c, long d) const {
    return e[((a * n + b) * n + c) * n + d];
  }
};

/// R_{ab}^{cd} = delta_{a+b,c+d} theta_{b-a+(b-d)(k-1)}(v-u+eta) /
/// (theta_{k(b-d)}(eta) theta_{d-a}(v-u)); throws PoleProximity if v-u is
/// within guard of (1/n)Gamma.
RTensor r_entries(const RMatrixSpec& spec, cplx u, cplx v);

/// Yang-Baxter residual at (u,v,w): worst entry mismatch of the two triple
/// contractions, relative to the largest contracted entry.
double ybe_residual(const RMatrixSpec& spec, cplx u, cplx v, cplx w);

/// Same contraction check on explicitly supplied tensors R(u,v), R(u,w),
/// R(v,w) — usable for fitted (degenerate) exchange coefficients.
double ybe_residual(const RTensor& Ruv, const RTensor& Ruw, const RTensor& Rvw);

struct UnitarityResult {
  double raw = 0.0;     // max |R(u,v)R(v,u) - I|
  double fitted = 0.0;  // max |R(u,v)R(v,u) - s I| with s fitted
  cplx s = 0.0;
};

UnitarityResult unitarity_residual(const RMatrixSpec& spec, cplx u, cplx v);

/// Scalar coefficient on the left of the defining exchange relation.
cplx relation8_prefactor(const RMatrixSpec& spec, cplx u, cplx v);

/// Limit check at eta -> mu/n + nu tau/n: the prefactor-normalized exchange
/// coefficients extrapolate (Neville, over a decreasing epsilon ladder) to
/// the permutation phase e^{(2 pi i/n)(b-a+k' nu) mu} E(nu (n-1)(v-u)) at
/// r = -k' nu and 0 elsewhere. The spectral factor E(nu (n-1)(v-u)) can be
/// absorbed into an index-linear rescaling of the generators; the residual
/// is measured against the convention actually induced by the exchange
/// coefficients. Returns the worst deviation over a, b, r.
double degenerate_eta_check(long n, long k, const Lattice& l, long mu, long nu,
                            cplx u, cplx v);

}  // namespace ellex
