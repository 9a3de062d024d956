#pragma once

#include <functional>

#include "ellex/complexutil.hpp"

namespace ellex {

enum class DegenerationMode { elliptic, trigonometric, rational };

struct Lattice {
  cplx tau;
  explicit Lattice(cplx t);
};

/// Truncation / tolerance configuration for all theta evaluations.
struct ThetaSeries {
  Lattice lattice;
  int truncation = 40;
  double tol = 1e-10;
  DegenerationMode mode = DegenerationMode::elliptic;

  explicit ThetaSeries(Lattice l, int N = 40, double tol_ = 1e-10,
                       DegenerationMode m = DegenerationMode::elliptic);
};

/// theta(z) = sum_a (-1)^a E(a z + a(a-1)/2 tau). Entire, 1-periodic,
/// theta(z+tau) = -E(-z) theta(z), single zero at 0 mod Gamma.
/// In the degenerate modes returns 1 - E(z) (trigonometric) or z (rational).
cplx theta(cplx z, const ThetaSeries& s);

/// Order-n basis of Theta_{n,(n-1)/2}: product of n shifted thetas times an
/// exponential factor. Index reduced mod n. Elliptic mode only.
cplx theta_alpha(long alpha, cplx z, long n, const ThetaSeries& s);

using Fn1 = std::function<cplx(cplx)>;

/// T_{1/n} f(z) = f(z + 1/n).
Fn1 op_shift(const Fn1& f, long n);

/// T_{tau/n} f(z) = E(z + 1/(2n) - (n-1)tau/(2n)) f(z + tau/n).
Fn1 op_shift_tau(const Fn1& f, long n, cplx tau);

/// |theta(nz) - normalized product of theta_0(z)...theta_{n-1}(z)|.
double identity1_residual(cplx z, long n, const ThetaSeries& s);

/// max(|f(z+1)-f(z)|, |f(z+tau) - (-1)^n E(-(nz-c)) f(z)|): membership
/// residual for Theta_{n,c}.
double quasi_periodicity_residual_1d(const Fn1& f, long n, cplx c, cplx z, cplx tau);

}  // namespace ellex
