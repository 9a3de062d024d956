#pragma once

#include <cstdint>
#include <vector>

#include "ellex/complexutil.hpp"

namespace ellex {

/// Hard cap on n. Keeps every tridiagonal determinant comfortably inside
/// int64 and bounds the combinatorics of the test sweeps.
inline constexpr std::int64_t kMaxN = 64;

/// Negative-regular continued fraction n/k = n_1 - 1/(n_2 - ... - 1/n_p),
/// all terms >= 2, gcd(n,k) = 1, 1 <= k < n.
struct CFrac {
  std::int64_t n = 0;
  std::int64_t k = 0;
  std::vector<std::int64_t> terms;

  int length() const { return static_cast<int>(terms.size()); }
};

/// Determinant of the tridiagonal matrix with diagonal (m_1,...,m_q) and
/// -1 off the diagonal; d() of the empty list is 1. Satisfies
/// d(m_1,...,m_q) = m_1 d(m_2,...,m_q) - d(m_3,...,m_q).
std::int64_t det_d(const std::vector<std::int64_t>& terms);

/// d of the slice terms[first..last) (0-based, half-open).
std::int64_t det_d_slice(const std::vector<std::int64_t>& terms, int first, int last);

/// The unique all->=2 expansion of n/k. Throws InvalidInput unless
/// gcd(n,k) = 1 and 1 <= k < n <= kMaxN.
CFrac expand(std::int64_t n, std::int64_t k);

/// Expansion of n/(n-k). Cross-checks the length/sum/partial-sum dualities
/// and the two-three block shape against the direct expansion; any mismatch
/// throws InternalError.
CFrac dual(const CFrac& c);

/// The (2,3)-block shape of the dual expansion, built by the contraction
/// rule (m_1, 2^(-1), m_2) -> (m_1 + m_2 - 2). Used as an independent route
/// to the dual terms.
std::vector<std::int64_t> dual_shape(const CFrac& c);

/// k' = d(n_1,...,n_{p-1}); satisfies k k' == 1 (mod n).
std::int64_t inverse_residue(const CFrac& c);

/// Shift constants entering the two homomorphisms. All entries are exact
/// integer multiples of eta.
struct HomConstants {
  cplx mu;                     // n eta
  std::vector<cplx> nu;        // nu_j     = d(n_{j+1},...,n_p) eta
  std::vector<cplx> lambda;    // lambda_j = d(n_1,...,n_{j-1}) eta
  std::vector<cplx> mu_prime;  // mu_j     = d(n_1',...,n_{j-1}') eta
  std::vector<cplx> gamma;     // gamma_j  = -d(n_{j+1}',...,n_{p'}') eta
};

HomConstants hom_constants(const CFrac& c, cplx eta);

/// Integer multipliers d(n_{j+1},...,n_p), j = 1..p (the nu_j / eta and the
/// numerators of the T_{1/n} shift vector).
std::vector<std::int64_t> trailing_dets(const CFrac& c);

/// Integer multipliers d(n_1,...,n_{j-1}), j = 1..p (the lambda_j / eta).
std::vector<std::int64_t> leading_dets(const CFrac& c);

}  // namespace ellex
