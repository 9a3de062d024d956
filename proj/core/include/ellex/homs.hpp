#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "ellex/cfrac.hpp"
#include "ellex/duality.hpp"
#include "ellex/rmatrix.hpp"
#include "ellex/sampling.hpp"
#include "ellex/thetap.hpp"

namespace ellex {

/// The dynamical algebra X_p^{m_1..m_p}(Gamma, mu; lambda_1..lambda_p)
/// attached to the continued fraction of n/k: mu = n eta and
/// lambda_j = d(n_1..n_{j-1}) eta. The intertwiner's spectral shift
/// multipliers are the plain integers d(n_{j+1}..n_p). The kernel theta
/// follows the series mode (elliptic / trigonometric / rational).
struct XAlgebraSpec {
  CFrac cfrac;
  Lattice lattice;
  std::vector<long> m;  // m_1..m_p
  cplx eta;
  HomConstants hc;
  ThetaSeries series;

  int p() const { return cfrac.length(); }
  long n() const { return cfrac.n; }
};

XAlgebraSpec make_x_algebra_spec(const CFrac& c, const Lattice& l,
                                 std::vector<long> m, cplx eta,
                                 DegenerationMode mode = DegenerationMode::elliptic);

/// Index-pattern families of the quadratic relations: all slots unequal;
/// first equal slot at nu (earlier slots unequal); equal slots at nu and
/// lambda with strictly unequal slots between (lambda = p+1 encodes "no
/// second equality").
enum class XCase { general, leading_equal, interior_equal };

struct XPattern {
  XCase kind = XCase::general;
  int nu = 0;      // 1-based position of the first equal slot
  int lambda = 0;  // 1-based position of the second equality (interior family)
};

XPattern classify_pattern(std::span<const long> alpha,
                          std::span<const long> beta);

/// A sample point for the X-algebra relations: spectral parameters, the
/// dynamical-variable values y[j][a] (0-based slot j, index a < m_j), and
/// the two index tuples.
struct XSample {
  cplx u, v;
  std::vector<std::vector<cplx>> y;
  std::vector<long> alpha, beta;
};

/// One right-hand-side term of an exchange relation: coefficient times
/// e_c(v') e_d(u').
struct XRelationTerm {
  std::vector<long> c, d;
  cplx coeff;
};

struct XRelation {
  cplx lhs_prefactor;  // multiplies e_alpha(u') e_beta(v') on the left
  std::vector<XRelationTerm> terms;
};

/// Exchange relation for e_alpha(u') e_beta(v'): the general-position
/// display if no slot coincides, else the leading-equal display at the
/// first equal slot (nu = 1 is the pure spectral swap).
XRelation x_coeffs(const XAlgebraSpec& spec, const XSample& s);

/// The interior-family relation between already-ordered products, for the
/// declared (nu, lambda) pattern: e_{..}(v') e_{..}(u') = sum of terms.
/// Supported windows: empty (lambda = nu+1, trivial identity) and a single
/// swapped slot (lambda = nu+2), whose coefficient
/// E(-mu) theta(W+mu)/theta(W-mu) is the unique involutive choice and is
/// certified numerically; wider windows throw InvalidInput.
XRelation x_interior_coeffs(const XAlgebraSpec& spec, const XSample& s,
                            int nu, int lambda);

/// The polyspectral algebra Y_{p'}(Gamma, mu; mu_1..mu_{p'}) attached to the
/// dual expansion n/(n-k): mu = n eta, mu_j = d(n'_1..n'_{j-1}) eta,
/// gamma_j = -d(n'_{j+1}..n'_{p'}) eta.
struct YAlgebraSpec {
  CFrac primal;  // (n, k)
  CFrac dualCfrac;
  Lattice lattice;
  cplx eta;
  cplx mu;
  std::vector<cplx> mu_prime, gamma;
  ThetaSeries series;

  int pp() const { return dualCfrac.length(); }
  long n() const { return primal.n; }
};

YAlgebraSpec make_y_algebra_spec(const CFrac& c, const Lattice& l, cplx eta);

struct YSample {
  cplx u, v;
  std::vector<cplx> u1, v1;  // the p' label parameters of each generator
};

struct YRelation {
  cplx lhs_prefactor;       // theta(v-u+mu)/theta(v-u)
  std::vector<cplx> f;      // f_1..f_{p'+1}
};

YRelation y_coeffs(const YAlgebraSpec& spec, const YSample& s);

/// Residual of the master identity tying theta, theta_alpha and the w basis:
/// the (p+1)-term sum of kernel-ratio-weighted w_a w_b products against the
/// (1/n) theta(1/n)..theta((n-1)/n)-normalized r-sum.
double identity2_residual(const WBasis& w, cplx eta, cplx u, cplx v,
                          std::span<const cplx> y, std::span<const cplx> z,
                          long alpha, long beta);

/// Full normal-ordered expansion of [prefactor . Phi(x_alpha(u)) Phi(x_beta(v))
/// - Phi(rhs of the exchange relation)] over e_C(nv) e_D(nu): the map of
/// psi-coefficients keyed by (C, D), plus the largest contributing term
/// magnitude for normalization.
struct PhiExpansion {
  std::map<std::pair<std::vector<long>, std::vector<long>>, cplx> psi;
  double scale = 0.0;
};

PhiExpansion phi_expansion(const XAlgebraSpec& spec, const WBasis& w, cplx u,
                           cplx v, const std::vector<std::vector<cplx>>& y,
                           long alpha, long beta);

/// |psi_{C,D}| / (1 + scale) for one target index pair.
double phi_residual(const XAlgebraSpec& spec, const WBasis& w, const XSample& s,
                    long alpha, long beta);

/// Worst psi-coefficient over all targets, reduced modulo the interior-family
/// relations among normal-ordered products (implemented for p <= 2, the
/// lengths exercised by the expansions under test).
double phi_residual_all(const XAlgebraSpec& spec, const WBasis& w, cplx u,
                        cplx v, const std::vector<std::vector<cplx>>& y,
                        long alpha, long beta);

/// |psi_{gamma,delta}| / (1 + scale) certifying that Psi intertwines the
/// polyspectral relation with the exchange relation; dual_w is the basis of
/// Theta_{n/(n-k)}.
double psi_residual(const YAlgebraSpec& spec, const WBasis& dual_w,
                    const YSample& s, long gamma, long delta);

/// Residual of the composition formula: the internal-index sum of the two
/// homomorphisms against the Delta_{n,n-k} kernel divided by the fitted
/// pairing constant. yA holds one dynamical value per slot (the selected
/// tuple A).
double composition_check(const DualityPair& pair, cplx u,
                         std::span<const cplx> uvec,
                         std::span<const cplx> yA);

/// Monomial replacement basis for the degenerate modes: the full family of
/// monomials prod_j t_j^{a_j} with 0 <= a_j < n_j, where t_j = E(z_j)
/// (trigonometric) or z_j (rational). Ordered primarily by the residue class
/// alpha with sum_j a_j d(n_{j+1}..n_p) == k alpha (mod n) -- the same
/// eigenphase convention that orders the elliptic w basis -- then
/// lexicographically, so index i = alpha lands on the lex-smallest
/// representative of residue alpha for i < n.
struct MonomialBasis {
  CFrac cfrac;
  DegenerationMode mode = DegenerationMode::trigonometric;
  std::vector<std::vector<long>> expo;  // expo[i][j], i < size()

  long n() const { return cfrac.n; }
  long size() const { return static_cast<long>(expo.size()); }
  int p() const { return cfrac.length(); }
  cplx eval(long i, std::span<const cplx> z) const;
};

MonomialBasis make_monomial_basis(const CFrac& c, DegenerationMode mode);

/// Exchange closure fit: express the reordered product of two intertwined
/// generators in the basis products and return the fitted coefficient
/// tensor (same storage convention as r_entries, without the elliptic
/// prefactor) together with the relative least-squares residual.
struct ExchangeFit {
  RTensor rhat;
  double fit_residual = 0.0;
};

/// Generic basis access so the fit runs over either the elliptic w basis or
/// a degenerate monomial basis.
struct BasisRef {
  long n = 0;
  int p = 0;
  std::function<cplx(long, std::span<const cplx>)> eval;
};

BasisRef basis_ref(const WBasis& w);
BasisRef basis_ref(const MonomialBasis& b);

ExchangeFit exchange_fit(const XAlgebraSpec& spec, const BasisRef& basis,
                         cplx u, cplx v, Sampler& sampler, int samples = 8);

/// Degenerate-mode closure fit over the full monomial family: the reordered
/// product of two intertwined generators is expressed in all
/// basis_a(.; v-side) basis_b(.; u-side) products. The closure holds per
/// target here (no interior-orbit reduction), and the fitted tensor --
/// indexed by monomials, so of edge size basis.size() -- is the degenerate
/// R-matrix of the construction.
ExchangeFit monomial_exchange_fit(const XAlgebraSpec& spec,
                                  const MonomialBasis& basis, cplx u, cplx v,
                                  Sampler& sampler, int samples = 6);

}  // namespace ellex
