#include "ellex/theta.hpp"

#include <cmath>

#include "ellex/errors.hpp"

namespace ellex {

Lattice::Lattice(cplx t) : tau(t) {
  if (!(t.imag() > 0.0)) throw InvalidInput("Lattice: Im tau must be > 0");
}

ThetaSeries::ThetaSeries(Lattice l, int N, double tol_, DegenerationMode m)
    : lattice(l), truncation(N), tol(tol_), mode(m) {
  if (N < 4) throw InvalidInput("ThetaSeries: truncation must be >= 4");
  if (!(tol_ > 0.0)) throw InvalidInput("ThetaSeries: tol must be > 0");
}

cplx theta(cplx z, const ThetaSeries& s) {
  switch (s.mode) {
    case DegenerationMode::trigonometric:
      return 1.0 - E(z);
    case DegenerationMode::rational:
      return z;
    case DegenerationMode::elliptic:
      break;
  }

  const cplx tau = s.lattice.tau;
  // Reduce Im z into the fundamental strip; the raw series blows up for
  // large |Im z|. theta(z0 + b tau) = (-1)^b E(-b z0 - b(b-1)/2 tau) theta(z0).
  const long b = std::lround(z.imag() / tau.imag());
  const cplx z0 = z - static_cast<double>(b) * tau;
  cplx mult = 1.0;
  if (b != 0) {
    double bd = static_cast<double>(b);
    mult = E(-bd * z0 - bd * (bd - 1.0) / 2.0 * tau);
    if (b % 2 != 0) mult = -mult;
  }

  const int N = s.truncation;
  cplx sum = 0.0;
  double last = 0.0;
  for (int a = -N; a <= N; ++a) {
    double ad = static_cast<double>(a);
    cplx term = E(ad * z0 + ad * (ad - 1.0) / 2.0 * tau);
    if (a % 2 != 0) term = -term;
    sum += term;
    if (a == N || a == -N) last = std::max(last, std::abs(term));
  }
  if (last > s.tol * std::max(std::abs(sum), 1e-30))
    throw TruncationError("theta: truncation insufficient for this z");
  return mult * sum;
}

cplx theta_alpha(long alpha, cplx z, long n, const ThetaSeries& s) {
  if (s.mode != DegenerationMode::elliptic)
    throw InvalidInput("theta_alpha: defined in elliptic mode only");
  if (n < 1) throw InvalidInput("theta_alpha: n must be >= 1");
  const double a = static_cast<double>(mod_n(alpha, n));
  const double nd = static_cast<double>(n);
  const cplx tau = s.lattice.tau;

  cplx prod = 1.0;
  for (long j = 0; j < n; ++j)
    prod *= theta(z + a / nd * tau + static_cast<double>(j) / nd, s);
  return prod * E(a * z + a * (a - nd) / (2.0 * nd) * tau + a / (2.0 * nd));
}

Fn1 op_shift(const Fn1& f, long n) {
  const double nd = static_cast<double>(n);
  return [f, nd](cplx z) { return f(z + 1.0 / nd); };
}

Fn1 op_shift_tau(const Fn1& f, long n, cplx tau) {
  const double nd = static_cast<double>(n);
  return [f, nd, tau](cplx z) {
    return E(z + 1.0 / (2.0 * nd) - (nd - 1.0) / (2.0 * nd) * tau) * f(z + tau / nd);
  };
}

double identity1_residual(cplx z, long n, const ThetaSeries& s) {
  if (n < 2) throw InvalidInput("identity1_residual: n must be >= 2");
  const double nd = static_cast<double>(n);

  cplx denom = 1.0;
  for (long r = 1; r < n; ++r) {
    cplx t0 = theta_alpha(r, 0.0, n, s);
    cplx tr = theta(static_cast<double>(r) / nd, s);
    if (std::abs(t0) < s.tol || std::abs(tr) < s.tol)
      throw PoleProximity("identity1_residual: vanishing normalization factor");
    denom *= t0 * tr;
  }
  cplx num = nd * E(-nd * (nd - 1.0) / 2.0 * z);
  for (long a = 0; a < n; ++a) num *= theta_alpha(a, z, n, s);

  cplx lhs = theta(nd * z, s), rhs = num / denom;
  // Both sides grow like e^{pi n(n-1) Im tau ...} away from the real axis;
  // compare relatively.
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

double quasi_periodicity_residual_1d(const Fn1& f, long n, cplx c, cplx z, cplx tau) {
  const double nd = static_cast<double>(n);
  cplx mult = E(-(nd * z - c));
  if (n % 2 != 0) mult = -mult;
  double r1 = std::abs(f(z + 1.0) - f(z));
  double r2 = std::abs(f(z + tau) - mult * f(z));
  return std::max(r1, r2);
}

}  // namespace ellex
