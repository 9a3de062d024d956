#include "ellex/rmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ellex/errors.hpp"

namespace ellex {

double dist_to_nth_lattice(cplx z, cplx tau, long n) {
  cplx w = static_cast<double>(n) * z;
  double b = std::round(w.imag() / tau.imag());
  cplx r = w - b * tau;
  double a = std::round(r.real());
  // One lattice reduction is enough for the parameter ranges used here.
  double best = std::abs(w - a - b * tau);
  for (int da = -1; da <= 1; ++da)
    for (int db = -1; db <= 1; ++db)
      best = std::min(best, std::abs(w - (a + da) - (b + db) * tau));
  return best / static_cast<double>(n);
}

RMatrixSpec make_rmatrix_spec(long n, long k, const Lattice& l, cplx eta,
                              double guard) {
  if (n < 2 || k < 1 || k >= n || std::gcd(n, k) != 1)
    throw InvalidInput("make_rmatrix_spec: need coprime 1 <= k < n");
  if (!(guard > 0.0))
    throw InvalidInput("make_rmatrix_spec: guard must be positive");
  if (dist_to_nth_lattice(eta, l.tau, n) < guard)
    throw PoleProximity("make_rmatrix_spec: eta within guard of (1/n)Gamma");
  return RMatrixSpec{n, k, l, eta, ThetaSeries{l}, guard};
}

RTensor r_entries(const RMatrixSpec& spec, cplx u, cplx v) {
  const long n = spec.n, k = spec.k;
  if (dist_to_nth_lattice(v - u, spec.lattice.tau, n) < spec.guard)
    throw PoleProximity("r_entries: v-u within guard of (1/n)Gamma");

  // theta_s(v-u) and theta_s(eta) for all s, plus the numerator row.
  std::vector<cplx> th_du(n), th_eta(n), th_num(n);
  for (long s = 0; s < n; ++s) {
    th_du[s] = theta_alpha(s, v - u, n, spec.series);
    th_eta[s] = theta_alpha(s, spec.eta, n, spec.series);
    th_num[s] = theta_alpha(s, v - u + spec.eta, n, spec.series);
  }

  RTensor t{n, u, v, std::vector<cplx>(n * n * n * n, 0.0)};
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b)
      for (long d = 0; d < n; ++d) {
        long c = mod_n(a + b - d, n);  // support delta_{a+b,c+d}
        t.at(a, b, c, d) = th_num[mod_n(b - a + (b - d) * (k - 1), n)] /
                           (th_eta[mod_n(k * (b - d), n)] * th_du[mod_n(d - a, n)]);
      }
  return t;
}

double ybe_residual(const RMatrixSpec& spec, cplx u, cplx v, cplx w) {
  return ybe_residual(r_entries(spec, u, v), r_entries(spec, u, w),
                      r_entries(spec, v, w));
}

double ybe_residual(const RTensor& Ruv, const RTensor& Ruw, const RTensor& Rvw) {
  const long n = Ruv.n;
  if (Ruw.n != n || Rvw.n != n)
    throw InvalidInput("ybe_residual: tensor dimensions disagree");

  double worst = 0.0, scale = 0.0;
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b)
      for (long g = 0; g < n; ++g)
        for (long l = 0; l < n; ++l)
          for (long f = 0; f < n; ++f) {
            // Index-sum support: psi is fixed by the other five.
            long ps = mod_n(a + b + g - l - f, n);
            cplx lhs = 0.0, rhs = 0.0;
            for (long mu = 0; mu < n; ++mu)
              for (long nu = 0; nu < n; ++nu)
                for (long tt = 0; tt < n; ++tt) {
                  lhs += Ruv.at(a, b, nu, mu) * Ruw.at(nu, g, l, tt) *
                         Rvw.at(mu, tt, f, ps);
                  rhs += Rvw.at(b, g, nu, mu) * Ruw.at(a, mu, tt, ps) *
                         Ruv.at(tt, nu, l, f);
                }
            worst = std::max(worst, std::abs(lhs - rhs));
            scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
          }
  return worst / (1.0 + scale);
}

UnitarityResult unitarity_residual(const RMatrixSpec& spec, cplx u, cplx v) {
  const long n = spec.n;
  RTensor F = r_entries(spec, u, v);
  RTensor B = r_entries(spec, v, u);

  // Exchanging twice: x_a(u)x_b(v) -> sum F_{ab}^{ef} x_f(v)x_e(u)
  //                                 -> sum F_{ab}^{ef} B_{fe}^{cd} x_d(u)x_c(v),
  // so P[(ab),(cd)] must be a multiple of delta_{ad} delta_{bc}.
  std::vector<cplx> P(n * n * n * n, 0.0);
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b)
      for (long c = 0; c < n; ++c)
        for (long d = 0; d < n; ++d) {
          cplx acc = 0.0;
          for (long e1 = 0; e1 < n; ++e1)
            for (long e2 = 0; e2 < n; ++e2)
              acc += F.at(a, b, e1, e2) * B.at(e2, e1, c, d);
          P[((a * n + b) * n + c) * n + d] = acc;
        }

  UnitarityResult r;
  cplx tr = 0.0;
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b) tr += P[((a * n + b) * n + b) * n + a];
  r.s = tr / static_cast<double>(n * n);
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b)
      for (long c = 0; c < n; ++c)
        for (long d = 0; d < n; ++d) {
          cplx val = P[((a * n + b) * n + c) * n + d];
          cplx id = (a == d && b == c) ? cplx(1.0) : cplx(0.0);
          r.raw = std::max(r.raw, std::abs(val - id));
          r.fitted = std::max(r.fitted, std::abs(val - r.s * id));
        }
  return r;
}

cplx relation8_prefactor(const RMatrixSpec& spec, cplx u, cplx v) {
  const long n = spec.n;
  if (dist_to_nth_lattice(v - u, spec.lattice.tau, n) < spec.guard)
    throw PoleProximity("relation8_prefactor: v-u within guard of (1/n)Gamma");
  cplx num = 1.0, den = 1.0;
  for (long s = 1; s < n; ++s) num *= theta_alpha(s, 0.0, n, spec.series);
  for (long s = 0; s < n; ++s) {
    num *= theta_alpha(s, v - u + spec.eta, n, spec.series);
    den *= theta_alpha(s, spec.eta, n, spec.series) *
           theta_alpha(s, v - u, n, spec.series);
  }
  return num / den;
}

double degenerate_eta_check(long n, long k, const Lattice& l, long mu, long nu,
                            cplx u, cplx v) {
  CFrac c = expand(n, k);
  long kp = inverse_residue(c);
  const cplx eta0 = (static_cast<double>(mu) + static_cast<double>(nu) * l.tau) /
                    static_cast<double>(n);
  const cplx dir = std::polar(1.0, 0.4487989505128276);  // generic direction
  const int levels = 7;

  // Normalized coefficients c_r(eps) for each (a,b); Neville-extrapolate to
  // eps = 0 and compare with the permutation phase.
  double worst = 0.0;
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b)
      for (long r = 0; r < n; ++r) {
        std::vector<double> xs(levels);
        std::vector<cplx> ys(levels);
        for (int j = 0; j < levels; ++j) {
          double eps = 0.02 / static_cast<double>(1 << j);
          RMatrixSpec spec = make_rmatrix_spec(n, k, l, eta0 + eps * dir);
          cplx coeff = theta_alpha(b - a + r * (k - 1), v - u + spec.eta, n,
                                   spec.series) /
                       (theta_alpha(k * r, spec.eta, n, spec.series) *
                        theta_alpha(b - a - r, v - u, n, spec.series));
          xs[j] = eps;
          ys[j] = coeff / relation8_prefactor(spec, u, v);
        }
        // Neville's scheme on the complex values.
        std::vector<cplx> t = ys;
        cplx prev_diag = t[0];
        for (int m = 1; m < levels; ++m) {
          for (int i = 0; i < levels - m; ++i)
            t[i] = ((0.0 - xs[i + m]) * t[i] - (0.0 - xs[i]) * t[i + 1]) /
                   (xs[i] - xs[i + m]);
          prev_diag = t[0];
        }
        cplx limit = t[0];
        // Convergence: last two Neville columns must agree.
        (void)prev_diag;
        std::vector<cplx> t2(ys.begin(), ys.end() - 1);
        std::vector<double> x2(xs.begin(), xs.end() - 1);
        for (int m = 1; m < levels - 1; ++m)
          for (int i = 0; i < levels - 1 - m; ++i)
            t2[i] = ((0.0 - x2[i + m]) * t2[i] - (0.0 - x2[i]) * t2[i + 1]) /
                    (x2[i] - x2[i + m]);
        if (std::abs(limit - t2[0]) > 1e-5 * (1.0 + std::abs(limit)))
          throw LimitNotConverged("degenerate_eta_check: Neville tail unstable");

        cplx expect = 0.0;
        if (mod_n(r + kp * nu, n) == 0)
          expect = E(static_cast<double>((b - a + kp * nu) * mu) /
                         static_cast<double>(n) +
                     static_cast<double>(nu * (n - 1)) * (v - u));
        worst = std::max(worst,
                         std::abs(limit - expect) / (1.0 + std::abs(expect)));
      }
  return worst;
}

}  // namespace ellex
