#include "ellex/homs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ellex/errors.hpp"

namespace ellex {

namespace {

double rel_diff(cplx a, cplx b) {
  return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
}

// Advance a mixed-radix tuple 0 <= t[j] < radix[j]; false once exhausted.
bool next_tuple(std::vector<long>& t, const std::vector<long>& radix) {
  for (size_t j = t.size(); j-- > 0;) {
    if (++t[j] < radix[j]) return true;
    t[j] = 0;
  }
  return false;
}

cplx safe_div(cplx num, cplx den, const char* where) {
  if (std::abs(den) < 1e-13)
    throw PoleProximity(std::string(where) + ": theta denominator near zero");
  return num / den;
}

}  // namespace

XAlgebraSpec make_x_algebra_spec(const CFrac& c, const Lattice& l,
                                 std::vector<long> m, cplx eta,
                                 DegenerationMode mode) {
  if (static_cast<int>(m.size()) != c.length())
    throw InvalidInput("make_x_algebra_spec: need one m_j per expansion term");
  for (long mj : m)
    if (mj < 1) throw InvalidInput("make_x_algebra_spec: m_j must be >= 1");
  XAlgebraSpec spec{c, l, std::move(m), eta, hom_constants(c, eta),
                    ThetaSeries{l}};
  spec.series.mode = mode;
  return spec;
}

XPattern classify_pattern(std::span<const long> alpha,
                          std::span<const long> beta) {
  if (alpha.size() != beta.size())
    throw InvalidInput("classify_pattern: tuples of different length");
  const int p = static_cast<int>(alpha.size());
  int first = 0, second = 0;
  for (int j = 1; j <= p; ++j) {
    if (alpha[j - 1] == beta[j - 1]) {
      if (first == 0) {
        first = j;
      } else if (second == 0) {
        second = j;
      }
    }
  }
  if (first == 0) return XPattern{XCase::general, 0, 0};
  if (first < p)
    return XPattern{XCase::interior_equal, first, second == 0 ? p + 1 : second};
  return XPattern{XCase::leading_equal, first, 0};
}

XRelation x_coeffs(const XAlgebraSpec& spec, const XSample& s) {
  const int p = spec.p();
  if (static_cast<int>(s.alpha.size()) != p ||
      static_cast<int>(s.beta.size()) != p ||
      static_cast<int>(s.y.size()) != p)
    throw InvalidInput("x_coeffs: sample arity mismatch");
  const ThetaSeries& ts = spec.series;
  const cplx mu = spec.hc.mu;
  const cplx du = s.v - s.u;

  // First slot where the two tuples agree (1-based); p+1 = general position.
  int nu = p + 1;
  for (int j = 1; j <= p; ++j)
    if (s.alpha[j - 1] == s.beta[j - 1]) {
      nu = j;
      break;
    }

  XRelation rel;
  if (nu == 1) {
    // Pure spectral swap: e_a(u) e_b(v) = e_a(v) e_b(u).
    rel.lhs_prefactor = 1.0;
    rel.terms.push_back({s.alpha, s.beta, 1.0});
    return rel;
  }

  auto Y = [&](int t) { return s.y[t - 1][s.alpha[t - 1]]; };
  auto Z = [&](int t) { return s.y[t - 1][s.beta[t - 1]]; };

  rel.lhs_prefactor = safe_div(theta(du + mu, ts), theta(du, ts), "x_coeffs");
  const int T = (nu == p + 1) ? p : nu - 1;
  for (int t = 0; t <= T; ++t) {
    cplx coeff;
    if (t == 0) {
      coeff = theta(mu, ts) *
              safe_div(theta(du + Y(1) - Z(1), ts),
                       theta(du, ts) * theta(Y(1) - Z(1), ts), "x_coeffs");
    } else if (t < T) {
      coeff = theta(mu, ts) *
              safe_div(theta(Y(t) - Z(t) + Y(t + 1) - Z(t + 1), ts),
                       theta(Y(t) - Z(t), ts) * theta(Y(t + 1) - Z(t + 1), ts),
                       "x_coeffs");
    } else {
      coeff = safe_div(theta(Y(T) - Z(T) + mu, ts), theta(Y(T) - Z(T), ts),
                       "x_coeffs");
    }
    XRelationTerm term;
    term.c.resize(p);
    term.d.resize(p);
    for (int j = 1; j <= p; ++j) {
      term.c[j - 1] = (j <= t) ? s.beta[j - 1] : s.alpha[j - 1];
      term.d[j - 1] = (j <= t) ? s.alpha[j - 1] : s.beta[j - 1];
    }
    term.coeff = coeff;
    rel.terms.push_back(std::move(term));
  }
  return rel;
}

XRelation x_interior_coeffs(const XAlgebraSpec& spec, const XSample& s, int nu,
                            int lambda) {
  const int p = spec.p();
  if (nu < 1 || nu >= p || lambda <= nu || lambda > p + 1)
    throw InvalidInput("x_interior_coeffs: need 1 <= nu < p, nu < lambda <= p+1");
  if (s.alpha[nu - 1] != s.beta[nu - 1])
    throw InvalidInput("x_interior_coeffs: alpha_nu != beta_nu");
  if (lambda <= p && s.alpha[lambda - 1] != s.beta[lambda - 1])
    throw InvalidInput("x_interior_coeffs: alpha_lambda != beta_lambda");
  for (int i = nu + 1; i < lambda; ++i)
    if (s.alpha[i - 1] == s.beta[i - 1])
      throw InvalidInput("x_interior_coeffs: interior slots must differ");

  const ThetaSeries& ts = spec.series;
  const cplx mu = spec.hc.mu;
  auto Y = [&](int t) { return s.y[t - 1][s.alpha[t - 1]]; };
  auto Z = [&](int t) { return s.y[t - 1][s.beta[t - 1]]; };

  XRelation rel;
  rel.lhs_prefactor = 1.0;
  if (lambda == nu + 1) {
    // Adjacent equalities: the permuted window is empty and the relation is
    // the trivial identity.
    rel.terms.push_back({s.alpha, s.beta, 1.0});
    return rel;
  }
  if (lambda > nu + 2)
    throw InvalidInput(
        "x_interior_coeffs: interior windows wider than one slot are not "
        "supported");
  // Single swapped slot t = nu+1. The coefficient E(-mu) theta(W+mu) /
  // theta(W-mu) is the unique one consistent with applying the relation in
  // both orientations; it is certified against the normal-ordered expansion
  // of the intertwined exchange relation.
  const int t = nu + 1;
  const cplx W = Y(t) - Z(t);
  cplx coeff = E(-mu) * safe_div(theta(W + mu, ts), theta(W - mu, ts),
                                 "x_interior_coeffs");
  XRelationTerm term;
  term.c.resize(p);
  term.d.resize(p);
  for (int j = 1; j <= p; ++j) {
    bool window = (j == t);
    term.c[j - 1] = window ? s.beta[j - 1] : s.alpha[j - 1];
    term.d[j - 1] = window ? s.alpha[j - 1] : s.beta[j - 1];
  }
  term.coeff = coeff;
  rel.terms.push_back(std::move(term));
  return rel;
}

YAlgebraSpec make_y_algebra_spec(const CFrac& c, const Lattice& l, cplx eta) {
  HomConstants hc = hom_constants(c, eta);
  YAlgebraSpec spec{c,  dual(c),       l, eta, hc.mu, hc.mu_prime,
                    hc.gamma, ThetaSeries{l}};
  return spec;
}

YRelation y_coeffs(const YAlgebraSpec& spec, const YSample& s) {
  const int pp = spec.pp();
  if (static_cast<int>(s.u1.size()) != pp ||
      static_cast<int>(s.v1.size()) != pp)
    throw InvalidInput("y_coeffs: label arity mismatch");
  const ThetaSeries& ts = spec.series;
  const cplx mu = spec.mu;
  const cplx du = s.v - s.u;

  YRelation rel;
  rel.lhs_prefactor = safe_div(theta(du + mu, ts), theta(du, ts), "y_coeffs");
  rel.f.resize(pp + 1);
  rel.f[0] = theta(mu, ts) *
             safe_div(theta(du + s.u1[0] - s.v1[0], ts),
                      theta(du, ts) * theta(s.u1[0] - s.v1[0], ts), "y_coeffs");
  for (int t = 1; t < pp; ++t)
    rel.f[t] =
        theta(mu, ts) *
        safe_div(theta(s.v1[t - 1] - s.u1[t - 1] + s.u1[t] - s.v1[t], ts),
                 theta(s.v1[t - 1] - s.u1[t - 1], ts) *
                     theta(s.u1[t] - s.v1[t], ts),
                 "y_coeffs");
  rel.f[pp] = safe_div(theta(s.v1[pp - 1] - s.u1[pp - 1] + mu, ts),
                       theta(s.v1[pp - 1] - s.u1[pp - 1], ts), "y_coeffs");
  return rel;
}

double identity2_residual(const WBasis& w, cplx eta, cplx u, cplx v,
                          std::span<const cplx> y, std::span<const cplx> z,
                          long alpha, long beta) {
  const long n = w.n();
  const long k = w.cfrac.k;
  const int p = w.p();
  if (static_cast<int>(y.size()) != p || static_cast<int>(z.size()) != p)
    throw InvalidInput("identity2_residual: argument arity mismatch");
  ThetaSeries ts{w.lattice};
  const double nd = static_cast<double>(n);
  const cplx ndu = nd * (v - u);

  // Spectral multipliers m_j are the plain trailing determinants; only the
  // additive shifts l_j carry eta. (Scaling the m_j by eta as well puts the
  // first left-hand term in a different quasi-periodicity class and the
  // identity fails.)
  std::vector<cplx> mm(p), ll(p);
  {
    auto td = trailing_dets(w.cfrac);
    auto ld = leading_dets(w.cfrac);
    for (int j = 0; j < p; ++j) {
      mm[j] = static_cast<double>(td[j]);
      ll[j] = static_cast<double>(ld[j]) * eta;
    }
  }

  auto args = [&](std::span<const cplx> base, cplx spectral, bool add_l) {
    std::vector<cplx> a(p);
    for (int j = 0; j < p; ++j)
      a[j] = base[j] + mm[j] * spectral + (add_l ? ll[j] : cplx(0.0));
    return a;
  };
  auto mix = [&](int t, std::span<const cplx> head, std::span<const cplx> tail,
                 cplx spectral, bool add_l) {
    // head in slots 1..t, tail in slots t+1..p.
    std::vector<cplx> a(p);
    for (int j = 0; j < p; ++j)
      a[j] = ((j < t) ? head[j] : tail[j]) + mm[j] * spectral +
             (add_l ? ll[j] : cplx(0.0));
    return a;
  };

  double scale = 0.0;
  cplx lhs = 0.0;
  {
    cplx t0 = safe_div(theta(y[0] - z[0] + ndu, ts),
                       theta(ndu, ts) * theta(y[0] - z[0], ts),
                       "identity2_residual") *
              w.eval(alpha, args(y, u, false)) * w.eval(beta, args(z, v, true));
    lhs += t0;
    scale = std::max(scale, std::abs(t0));
  }
  for (int t = 1; t <= p - 1; ++t) {
    cplx coeff = safe_div(theta(z[t - 1] - y[t - 1] + y[t] - z[t], ts),
                          theta(z[t - 1] - y[t - 1], ts) * theta(y[t] - z[t], ts),
                          "identity2_residual");
    cplx term = coeff * w.eval(alpha, mix(t, z, y, u, false)) *
                w.eval(beta, mix(t, y, z, v, true));
    lhs += term;
    scale = std::max(scale, std::abs(term));
  }
  {
    cplx tp = safe_div(theta(z[p - 1] - y[p - 1] + nd * eta, ts),
                       theta(z[p - 1] - y[p - 1], ts) * theta(nd * eta, ts),
                       "identity2_residual") *
              w.eval(alpha, args(z, u, false)) * w.eval(beta, args(y, v, true));
    lhs += tp;
    scale = std::max(scale, std::abs(tp));
  }

  cplx kconst = 1.0 / nd;
  for (long j = 1; j < n; ++j)
    kconst *= theta(static_cast<double>(j) / nd, ts);
  cplx rhs = 0.0;
  for (long r = 0; r < n; ++r) {
    cplx cr = safe_div(theta_alpha(beta - alpha + r * (k - 1), v - u + eta, n, ts),
                       theta_alpha(k * r, eta, n, ts) *
                           theta_alpha(beta - alpha - r, v - u, n, ts),
                       "identity2_residual");
    cplx term = kconst * cr * w.eval(beta - r, args(y, v, false)) *
                w.eval(alpha + r, args(z, u, true));
    rhs += term;
    scale = std::max(scale, std::abs(term));
  }
  return std::abs(lhs - rhs) / (1.0 + scale);
}

namespace {

// Shared machinery for the image of the exchange relation under the
// intertwiner built on an abstract basis: accumulates the coefficient of
// every normal-ordered product e_C(nv) e_D(nu), with the prefactor handling
// left to the caller (pref multiplies the reordered left-hand side only).
PhiExpansion expand_exchange(const XAlgebraSpec& spec, const BasisRef& basis,
                             cplx u, cplx v,
                             const std::vector<std::vector<cplx>>& y,
                             long alpha, long beta, cplx pref) {
  const int p = spec.p();
  const long n = spec.n();
  const long k = spec.cfrac.k;
  if (static_cast<int>(y.size()) != p)
    throw InvalidInput("expand_exchange: dynamical-variable arity mismatch");
  for (int j = 0; j < p; ++j)
    if (static_cast<long>(y[j].size()) != spec.m[j])
      throw InvalidInput("expand_exchange: need m_j values per slot");
  const cplx mu = spec.hc.mu;
  const double nd = static_cast<double>(n);
  const auto td = trailing_dets(spec.cfrac);

  PhiExpansion out;
  auto eval_at = [&](long idx, const std::vector<long>& tup, cplx spectral,
                     const std::vector<long>* other) {
    // Basis element idx at arguments y_{tup_j, j} + d(n_{j+1}..n_p) *
    // spectral (integer multiplier), plus the dynamical shift
    // lambda_j - mu delta when moved past e_{other}.
    std::vector<cplx> a(p);
    for (int j = 0; j < p; ++j) {
      a[j] = y[j][tup[j]] + static_cast<double>(td[j]) * spectral;
      if (other != nullptr) {
        a[j] += spec.hc.lambda[j];
        if ((*other)[j] == tup[j]) a[j] -= mu;
      }
    }
    return basis.eval(idx, a);
  };

  // Left-hand side: pref . sum_{A,B} w_alpha(y_A + nu u) w_beta(y_B + nu v +
  // lambda - mu delta) e_A(nu) e_B(nv), reordered term by term.
  std::vector<long> A(p, 0);
  do {
    std::vector<long> B(p, 0);
    do {
      cplx base = pref * eval_at(alpha, A, u, nullptr) *
                  eval_at(beta, B, v, &A);
      XSample xs{nd * u, nd * v, y, A, B};
      XRelation rel = x_coeffs(spec, xs);
      for (const XRelationTerm& term : rel.terms) {
        cplx val = base * term.coeff / rel.lhs_prefactor;
        out.psi[{term.c, term.d}] += val;
        out.scale = std::max(out.scale, std::abs(val));
      }
    } while (next_tuple(B, spec.m));
  } while (next_tuple(A, spec.m));

  // Right-hand side: sum_r c_r sum_{C,D} w_{beta-r}(y_C + nu v)
  // w_{alpha+r}(y_D + nu u + lambda - mu delta) e_C(nv) e_D(nu).
  const ThetaSeries& ts = spec.series;
  for (long r = 0; r < n; ++r) {
    cplx cr = safe_div(
        theta_alpha(beta - alpha + r * (k - 1), v - u + spec.eta, n, ts),
        theta_alpha(k * r, spec.eta, n, ts) *
            theta_alpha(beta - alpha - r, v - u, n, ts),
        "expand_exchange");
    std::vector<long> C(p, 0);
    do {
      std::vector<long> D(p, 0);
      do {
        cplx val = cr * eval_at(beta - r, C, v, nullptr) *
                   eval_at(alpha + r, D, u, &C);
        out.psi[{C, D}] -= val;
        out.scale = std::max(out.scale, std::abs(val));
      } while (next_tuple(D, spec.m));
    } while (next_tuple(C, spec.m));
  }
  return out;
}

}  // namespace

BasisRef basis_ref(const WBasis& w) {
  return BasisRef{w.n(), w.p(),
                  [&w](long a, std::span<const cplx> z) { return w.eval(a, z); }};
}

BasisRef basis_ref(const MonomialBasis& b) {
  return BasisRef{b.size(), b.p(),
                  [&b](long a, std::span<const cplx> z) { return b.eval(a, z); }};
}

PhiExpansion phi_expansion(const XAlgebraSpec& spec, const WBasis& w, cplx u,
                           cplx v, const std::vector<std::vector<cplx>>& y,
                           long alpha, long beta) {
  if (w.cfrac.n != spec.cfrac.n || w.cfrac.k != spec.cfrac.k)
    throw InvalidInput("phi_expansion: basis and spec disagree on (n,k)");
  if (spec.series.mode != DegenerationMode::elliptic)
    throw InvalidInput("phi_expansion: needs the elliptic kernel");
  RMatrixSpec rs = make_rmatrix_spec(spec.cfrac.n, spec.cfrac.k, spec.lattice,
                                     spec.eta);
  cplx pref = relation8_prefactor(rs, u, v);
  return expand_exchange(spec, basis_ref(w), u, v, y, alpha, beta, pref);
}

double phi_residual(const XAlgebraSpec& spec, const WBasis& w, const XSample& s,
                    long alpha, long beta) {
  PhiExpansion exp = phi_expansion(spec, w, s.u, s.v, s.y, alpha, beta);
  auto it = exp.psi.find({s.alpha, s.beta});
  if (it == exp.psi.end()) return 0.0;
  return std::abs(it->second) / (1.0 + exp.scale);
}

double phi_residual_all(const XAlgebraSpec& spec, const WBasis& w, cplx u,
                        cplx v, const std::vector<std::vector<cplx>>& y,
                        long alpha, long beta) {
  const int p = spec.p();
  if (p > 2)
    throw InvalidInput(
        "phi_residual_all: interior-relation reduction implemented for p <= 2");
  PhiExpansion exp = phi_expansion(spec, w, u, v, y, alpha, beta);
  const ThetaSeries& ts = spec.series;
  const cplx mu = spec.hc.mu;
  double worst = 0.0;
  for (const auto& [key, val] : exp.psi) {
    const auto& [C, D] = key;
    if (p == 2 && C[0] == D[0] && C[1] != D[1]) {
      // Targets related by the relation swapping the second slot of the
      // normal-ordered product: e_{(c,x)}(v') e_{(c,y)}(u') equals
      // E(-mu) theta(W+mu)/theta(W-mu) times the swapped product, with
      // W = y_x - y_y. Only the weighted orbit sum
      // theta(W+mu)/theta(W) psi + theta(-W+mu)/theta(-W) psi' must vanish.
      // Count each unordered pair once.
      if (C[1] < D[1]) {
        auto it = exp.psi.find({{C[0], D[1]}, {D[0], C[1]}});
        cplx partner = (it != exp.psi.end()) ? it->second : cplx(0.0);
        const cplx W = y[1][C[1]] - y[1][D[1]];
        const cplx r1 = safe_div(theta(W + mu, ts), theta(W, ts),
                                 "phi_residual_all");
        const cplx r2 = safe_div(theta(-W + mu, ts), theta(-W, ts),
                                 "phi_residual_all");
        const double norm = std::max({1.0, std::abs(r1), std::abs(r2)});
        worst = std::max(worst, std::abs(r1 * val + r2 * partner) / norm);
      }
    } else {
      worst = std::max(worst, std::abs(val));
    }
  }
  return worst / (1.0 + exp.scale);
}

double psi_residual(const YAlgebraSpec& spec, const WBasis& dual_w,
                    const YSample& s, long gamma, long delta) {
  const long n = spec.n();
  const long k = spec.primal.k;
  const int pp = spec.pp();
  if (dual_w.cfrac.n != n || dual_w.cfrac.k != n - k)
    throw InvalidInput("psi_residual: basis must span Theta_{n/(n-k)}");
  if (static_cast<int>(s.u1.size()) != pp ||
      static_cast<int>(s.v1.size()) != pp)
    throw InvalidInput("psi_residual: label arity mismatch");
  ThetaSeries ts{spec.lattice};
  const double nd = static_cast<double>(n);
  const cplx u = s.u, v = s.v, du = v - u, eta = spec.eta;

  RMatrixSpec rs = make_rmatrix_spec(n, k, spec.lattice, eta);
  cplx pref = relation8_prefactor(rs, u, v);
  YSample spectral{nd * u, nd * v, s.u1, s.v1};
  YRelation rel = y_coeffs(spec, spectral);

  // The spectral multiplier is the integer -d(n'_{j+1}..n'_{p'}) =
  // gamma_j / eta; the additive label shifts mu'_j keep the eta scale.
  if (eta == cplx(0.0))
    throw InvalidInput("psi_residual: eta must be nonzero");
  std::vector<cplx> gh(pp);
  for (int j = 0; j < pp; ++j) gh[j] = spec.gamma[j] / eta;
  auto args = [&](std::span<const cplx> base, cplx sp, bool add_mu) {
    std::vector<cplx> a(pp);
    for (int j = 0; j < pp; ++j)
      a[j] = base[j] + gh[j] * sp + (add_mu ? spec.mu_prime[j] : cplx(0.0));
    return a;
  };
  auto mixed = [&](int t, std::span<const cplx> head, std::span<const cplx> tail,
                   cplx sp, bool add_mu) {
    std::vector<cplx> a(pp);
    for (int j = 0; j < pp; ++j)
      a[j] = ((j < t) ? head[j] : tail[j]) + gh[j] * sp +
             (add_mu ? spec.mu_prime[j] : cplx(0.0));
    return a;
  };

  double scale = 0.0;
  cplx rsum = 0.0;
  for (long r = 0; r < n; ++r) {
    cplx cr = safe_div(theta_alpha(delta - gamma - r * (k + 1), du + eta, n, ts),
                       theta_alpha(-k * r, eta, n, ts) *
                           theta_alpha(delta - gamma - r, du, n, ts),
                       "psi_residual");
    cplx term = dual_w.eval(delta - r, args(s.u1, u, false)) *
                dual_w.eval(gamma + r, args(s.v1, v, true)) * cr;
    rsum += term;
    scale = std::max(scale, std::abs(term));
  }
  rsum *= rel.lhs_prefactor / pref;

  cplx bracket = 0.0;
  {
    cplx t0 = rel.f[0] * dual_w.eval(gamma, args(s.u1, v, false)) *
              dual_w.eval(delta, args(s.v1, u, true));
    bracket += t0;
    scale = std::max(scale, std::abs(t0));
  }
  for (int t = 1; t < pp; ++t) {
    cplx term = rel.f[t] * dual_w.eval(gamma, mixed(t, s.v1, s.u1, v, false)) *
                dual_w.eval(delta, mixed(t, s.u1, s.v1, u, true));
    bracket += term;
    scale = std::max(scale, std::abs(term));
  }
  {
    cplx tl = rel.f[pp] * dual_w.eval(gamma, args(s.v1, v, false)) *
              dual_w.eval(delta, args(s.u1, u, true));
    bracket += tl;
    scale = std::max(scale, std::abs(tl));
  }
  return std::abs(rsum - bracket) / (1.0 + scale);
}

double composition_check(const DualityPair& pair, cplx u,
                         std::span<const cplx> uvec, std::span<const cplx> yA) {
  if (pair.c == 0.0)
    throw InvalidInput("composition_check: pairing constant not fitted");
  const int pprimal = pair.primal.p(), pdual = pair.dual.p();
  if (static_cast<int>(uvec.size()) != pprimal ||
      static_cast<int>(yA.size()) != pdual)
    throw InvalidInput("composition_check: argument arity mismatch");
  auto gtd = trailing_dets(pair.primal.cfrac);
  auto ntd = trailing_dets(pair.dual.cfrac);
  std::vector<cplx> z(pprimal), zp(pdual);
  for (int j = 0; j < pprimal; ++j)
    z[j] = uvec[j] - static_cast<double>(gtd[j]) * u;
  for (int j = 0; j < pdual; ++j)
    zp[j] = yA[j] + static_cast<double>(ntd[j]) * u;
  cplx lhs = delta_w_sum(pair, z, zp);
  cplx rhs = delta_product(pair, z, zp) / pair.c;
  return rel_diff(lhs, rhs);
}

cplx MonomialBasis::eval(long i, std::span<const cplx> z) const {
  const auto& a = expo[mod_n(i, size())];
  cplx prod = 1.0;
  for (int j = 0; j < p(); ++j) {
    cplx t = (mode == DegenerationMode::trigonometric) ? E(z[j]) : z[j];
    for (long q = 0; q < a[j]; ++q) prod *= t;
  }
  return prod;
}

MonomialBasis make_monomial_basis(const CFrac& c, DegenerationMode mode) {
  if (mode == DegenerationMode::elliptic)
    throw InvalidInput("make_monomial_basis: degenerate modes only");
  const long n = c.n;
  const int p = c.length();
  auto td = trailing_dets(c);

  MonomialBasis b{c, mode, {}};
  // The residue class of an exponent vector: sum_j a_j d(n_{j+1}..n_p)
  // == k alpha (mod n).
  auto residue = [&](const std::vector<long>& a) {
    long res = 0;
    for (int j = 0; j < p; ++j) res += a[j] * td[j];
    for (long al = 0; al < n; ++al)
      if (mod_n(res - c.k * al, n) == 0) return al;
    throw InternalError("make_monomial_basis: residue class unrepresented");
  };
  // Group the degree-bounded exponent tuples by residue class, keeping the
  // lexicographic sweep order within each class, then interleave so that
  // entry i < n is the lex-smallest representative of residue i.
  std::vector<std::vector<std::vector<long>>> byres(n);
  std::vector<long> radix(c.terms.begin(), c.terms.end());
  std::vector<long> a(p, 0);
  do {
    byres[residue(a)].push_back(a);
  } while (next_tuple(a, radix));
  for (bool any = true; any;) {
    any = false;
    for (long al = 0; al < n; ++al)
      if (!byres[al].empty()) {
        b.expo.push_back(byres[al].front());
        byres[al].erase(byres[al].begin());
        any = true;
      }
  }
  return b;
}

ExchangeFit exchange_fit(const XAlgebraSpec& spec, const BasisRef& basis,
                         cplx u, cplx v, Sampler& sampler, int samples) {
  const long n = spec.n();
  const int p = spec.p();
  if (basis.n != n)
    throw InvalidInput(
        "exchange_fit: needs a residue-graded basis of size n (use "
        "monomial_exchange_fit for the degenerate monomial family)");
  if (p > 2)
    throw InvalidInput(
        "exchange_fit: interior-relation reduction implemented for p <= 2");
  if (samples < 2) throw InvalidInput("exchange_fit: need at least 2 samples");
  long ntargets = 1;
  for (long mj : spec.m) ntargets *= mj;
  ntargets *= ntargets;
  if (samples * ntargets < 2 * n)
    throw InvalidInput("exchange_fit: underdetermined fit");

  ExchangeFit fit;
  fit.rhat = RTensor{n, u, v, std::vector<cplx>(n * n * n * n, 0.0)};

  const cplx mu = spec.hc.mu;
  const auto td = trailing_dets(spec.cfrac);
  std::vector<std::vector<std::vector<cplx>>> ys(samples);
  for (int i = 0; i < samples; ++i) {
    ys[i].resize(p);
    for (int j = 0; j < p; ++j) {
      ys[i][j].resize(spec.m[j]);
      for (long a = 0; a < spec.m[j]; ++a)
        ys[i][j][a] = sampler.cell(spec.lattice.tau);
    }
  }

  for (long za = 0; za < n; ++za)
    for (long zb = 0; zb < n; ++zb) {
      std::vector<Eigen::RowVectorXcd> mrows;
      std::vector<cplx> rvals;
      for (int i = 0; i < samples; ++i) {
        const auto& y = ys[i];
        // Left side: reorder the product of the two intertwined generators.
        std::map<std::pair<std::vector<long>, std::vector<long>>, cplx> lhs;
        std::vector<long> A(p, 0);
        do {
          std::vector<long> B(p, 0);
          do {
            std::vector<cplx> argA(p), argB(p);
            for (int j = 0; j < p; ++j) {
              double nh = static_cast<double>(td[j]);
              argA[j] = y[j][A[j]] + nh * u;
              argB[j] = y[j][B[j]] + nh * v + spec.hc.lambda[j];
              if (A[j] == B[j]) argB[j] -= mu;
            }
            cplx base = basis.eval(za, argA) * basis.eval(zb, argB);
            XSample xs{static_cast<double>(n) * u, static_cast<double>(n) * v,
                       y, A, B};
            XRelation rel = x_coeffs(spec, xs);
            for (const XRelationTerm& term : rel.terms)
              lhs[{term.c, term.d}] += base * term.coeff / rel.lhs_prefactor;
          } while (next_tuple(B, spec.m));
        } while (next_tuple(A, spec.m));

        // One equation per target (C, D). The expansion matches the model
        // per target except on the slot-1-equal interior orbits (p = 2),
        // where only the weighted combination
        // theta(W+mu)/theta(W) eq + theta(-W+mu)/theta(-W) eq' vanishes;
        // those pairs contribute one combined equation.
        auto model_row = [&](const std::vector<long>& C,
                             const std::vector<long>& D) {
          Eigen::RowVectorXcd m(n);
          for (long r = 0; r < n; ++r) {
            std::vector<cplx> argC(p), argD(p);
            for (int j = 0; j < p; ++j) {
              double nh = static_cast<double>(td[j]);
              argC[j] = y[j][C[j]] + nh * v;
              argD[j] = y[j][D[j]] + nh * u + spec.hc.lambda[j];
              if (C[j] == D[j]) argD[j] -= mu;
            }
            m(r) = basis.eval(zb - r, argC) * basis.eval(za + r, argD);
          }
          return m;
        };
        auto lhs_at = [&](const std::vector<long>& C,
                          const std::vector<long>& D) {
          auto it = lhs.find({C, D});
          return (it != lhs.end()) ? it->second : cplx(0.0);
        };
        std::vector<long> C(p, 0);
        do {
          std::vector<long> D(p, 0);
          do {
            if (p == 2 && C[0] == D[0] && C[1] != D[1]) {
              if (C[1] < D[1]) {
                std::vector<long> Cp = {C[0], D[1]}, Dp = {D[0], C[1]};
                const cplx W = y[1][C[1]] - y[1][D[1]];
                const cplx r1 =
                    safe_div(theta(W + mu, spec.series),
                             theta(W, spec.series), "exchange_fit");
                const cplx r2 =
                    safe_div(theta(-W + mu, spec.series),
                             theta(-W, spec.series), "exchange_fit");
                const double norm =
                    std::max({1.0, std::abs(r1), std::abs(r2)});
                mrows.push_back((r1 * model_row(C, D) +
                                 r2 * model_row(Cp, Dp)) /
                                norm);
                rvals.push_back((r1 * lhs_at(C, D) + r2 * lhs_at(Cp, Dp)) /
                                norm);
              }
            } else {
              mrows.push_back(model_row(C, D));
              rvals.push_back(lhs_at(C, D));
            }
          } while (next_tuple(D, spec.m));
        } while (next_tuple(C, spec.m));
      }

      Eigen::MatrixXcd M(mrows.size(), n);
      Eigen::VectorXcd rhs(mrows.size());
      for (size_t i = 0; i < mrows.size(); ++i) {
        M.row(i) = mrows[i];
        rhs(i) = rvals[i];
      }
      Eigen::VectorXcd x = M.colPivHouseholderQr().solve(rhs);
      double res = (M * x - rhs).norm() / (1e-30 + rhs.norm());
      fit.fit_residual = std::max(fit.fit_residual, res);
      for (long r = 0; r < n; ++r)
        fit.rhat.at(za, zb, mod_n(za + r, n), mod_n(zb - r, n)) = x(r);
    }
  return fit;
}

ExchangeFit monomial_exchange_fit(const XAlgebraSpec& spec,
                                  const MonomialBasis& basis, cplx u, cplx v,
                                  Sampler& sampler, int samples) {
  const long n = spec.n();
  const int p = spec.p();
  if (spec.series.mode == DegenerationMode::elliptic)
    throw InvalidInput("monomial_exchange_fit: degenerate modes only");
  if (basis.mode != spec.series.mode ||
      basis.cfrac.n != n || basis.cfrac.k != spec.cfrac.k)
    throw InvalidInput("monomial_exchange_fit: basis and spec disagree");
  if (p > 2)
    throw InvalidInput(
        "monomial_exchange_fit: interior-relation reduction implemented for "
        "p <= 2");
  if (samples < 2)
    throw InvalidInput("monomial_exchange_fit: need at least 2 samples");
  const long N = basis.size();
  long ntargets = 1;
  for (long mj : spec.m) ntargets *= mj;
  ntargets *= ntargets;
  if (samples * ntargets < N * N + N)
    throw InvalidInput("monomial_exchange_fit: underdetermined fit");

  ExchangeFit fit;
  fit.rhat = RTensor{N, u, v, std::vector<cplx>(N * N * N * N, 0.0)};

  const cplx mu = spec.hc.mu;
  const auto td = trailing_dets(spec.cfrac);
  std::vector<std::vector<std::vector<cplx>>> ys(samples);
  for (int i = 0; i < samples; ++i) {
    ys[i].resize(p);
    for (int j = 0; j < p; ++j) {
      ys[i][j].resize(spec.m[j]);
      for (long a = 0; a < spec.m[j]; ++a)
        ys[i][j][a] = sampler.cell(spec.lattice.tau);
    }
  }

  for (long sa = 0; sa < N; ++sa)
    for (long sb = 0; sb < N; ++sb) {
      std::vector<Eigen::RowVectorXcd> mrows;
      std::vector<cplx> rvals;
      for (int i = 0; i < samples; ++i) {
        const auto& y = ys[i];
        std::map<std::pair<std::vector<long>, std::vector<long>>, cplx> lhs;
        std::vector<long> A(p, 0);
        do {
          std::vector<long> B(p, 0);
          do {
            std::vector<cplx> argA(p), argB(p);
            for (int j = 0; j < p; ++j) {
              double nh = static_cast<double>(td[j]);
              argA[j] = y[j][A[j]] + nh * u;
              argB[j] = y[j][B[j]] + nh * v + spec.hc.lambda[j];
              if (A[j] == B[j]) argB[j] -= mu;
            }
            cplx base = basis.eval(sa, argA) * basis.eval(sb, argB);
            XSample xs{static_cast<double>(n) * u, static_cast<double>(n) * v,
                       y, A, B};
            XRelation rel = x_coeffs(spec, xs);
            for (const XRelationTerm& term : rel.terms)
              lhs[{term.c, term.d}] += base * term.coeff / rel.lhs_prefactor;
          } while (next_tuple(B, spec.m));
        } while (next_tuple(A, spec.m));

        // Per-target equations, with the same interior-orbit reduction as in
        // exchange_fit: slot-1-equal pairs contribute one combined row,
        // weighted with the mode's kernel.
        auto model_row = [&](const std::vector<long>& C,
                             const std::vector<long>& D) {
          Eigen::RowVectorXcd m(N * N);
          std::vector<cplx> argC(p), argD(p);
          for (int j = 0; j < p; ++j) {
            double nh = static_cast<double>(td[j]);
            argC[j] = y[j][C[j]] + nh * v;
            argD[j] = y[j][D[j]] + nh * u + spec.hc.lambda[j];
            if (C[j] == D[j]) argD[j] -= mu;
          }
          for (long a = 0; a < N; ++a)
            for (long b = 0; b < N; ++b)
              m(a * N + b) = basis.eval(a, argC) * basis.eval(b, argD);
          return m;
        };
        auto lhs_at = [&](const std::vector<long>& C,
                          const std::vector<long>& D) {
          auto it = lhs.find({C, D});
          return (it != lhs.end()) ? it->second : cplx(0.0);
        };
        std::vector<long> C(p, 0);
        do {
          std::vector<long> D(p, 0);
          do {
            if (p == 2 && C[0] == D[0] && C[1] != D[1]) {
              if (C[1] < D[1]) {
                std::vector<long> Cp = {C[0], D[1]}, Dp = {D[0], C[1]};
                const cplx W = y[1][C[1]] - y[1][D[1]];
                const cplx r1 =
                    safe_div(theta(W + mu, spec.series),
                             theta(W, spec.series), "monomial_exchange_fit");
                const cplx r2 =
                    safe_div(theta(-W + mu, spec.series),
                             theta(-W, spec.series), "monomial_exchange_fit");
                const double norm =
                    std::max({1.0, std::abs(r1), std::abs(r2)});
                mrows.push_back((r1 * model_row(C, D) +
                                 r2 * model_row(Cp, Dp)) /
                                norm);
                rvals.push_back((r1 * lhs_at(C, D) + r2 * lhs_at(Cp, Dp)) /
                                norm);
              }
            } else {
              mrows.push_back(model_row(C, D));
              rvals.push_back(lhs_at(C, D));
            }
          } while (next_tuple(D, spec.m));
        } while (next_tuple(C, spec.m));
      }

      Eigen::MatrixXcd M(mrows.size(), N * N);
      Eigen::VectorXcd rhs(mrows.size());
      for (size_t i = 0; i < mrows.size(); ++i) {
        M.row(i) = mrows[i];
        rhs(i) = rvals[i];
      }
      Eigen::VectorXcd x = M.colPivHouseholderQr().solve(rhs);
      double res = (M * x - rhs).norm() / (1e-30 + rhs.norm());
      fit.fit_residual = std::max(fit.fit_residual, res);
      // at(a, b, c, d) stores the coefficient of basis_d(.; v) basis_c(.; u)
      // in the reorder of basis_a(.; u) basis_b(.; v).
      for (long a = 0; a < N; ++a)
        for (long b = 0; b < N; ++b)
          fit.rhat.at(sa, sb, b, a) = x(a * N + b);
    }
  return fit;
}

}  // namespace ellex
