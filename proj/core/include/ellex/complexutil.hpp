#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace ellex {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// E(x) = e^{2 pi i x}. Every exponential in the library routes through
/// this one primitive so the 2*pi*i convention is pinned in one place.
inline cplx E(cplx x) { return std::exp(cplx(0.0, two_pi) * x); }

/// Residue in [0, n).
inline long mod_n(long a, long n) {
  long r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace ellex
