#include "ellex/cfrac.hpp"

#include <numeric>

#include "ellex/errors.hpp"

namespace ellex {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw InternalError("det_d: integer overflow");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw InternalError("det_d: integer overflow");
  return r;
}

}  // namespace

std::int64_t det_d_slice(const std::vector<std::int64_t>& terms, int first, int last) {
  // Back-to-front: d(m_q) = m_q, d(m_{q-1},m_q) = m_{q-1} m_q - 1, ...
  std::int64_t d = 1;   // d of empty tail
  std::int64_t dd = 0;  // d of tail one shorter (d of "past the end")
  for (int i = last - 1; i >= first; --i) {
    std::int64_t next = checked_sub(checked_mul(terms[i], d), dd);
    dd = d;
    d = next;
  }
  return d;
}

std::int64_t det_d(const std::vector<std::int64_t>& terms) {
  return det_d_slice(terms, 0, static_cast<int>(terms.size()));
}

CFrac expand(std::int64_t n, std::int64_t k) {
  if (n < 2 || n > kMaxN) throw InvalidInput("expand: need 2 <= n <= 64");
  if (k < 1 || k >= n) throw InvalidInput("expand: need 1 <= k < n");
  if (std::gcd(n, k) != 1) throw InvalidInput("expand: n and k must be coprime");

  CFrac c;
  c.n = n;
  c.k = k;
  // Greedy ceiling division: n/k = a - (a - n/k), a = ceil(n/k), so the
  // remainder is 1/(k / (a k - n)); a k - n < k keeps it descending.
  std::int64_t a_num = n, a_den = k;
  while (a_den > 0) {
    std::int64_t q = (a_num + a_den - 1) / a_den;  // ceil
    c.terms.push_back(q);
    std::int64_t next_den = q * a_den - a_num;
    a_num = a_den;
    a_den = next_den;
  }

  if (det_d(c.terms) != n || det_d_slice(c.terms, 1, c.length()) != k)
    throw InternalError("expand: determinant round-trip failed");
  for (std::int64_t t : c.terms)
    if (t < 2) throw InternalError("expand: produced a term < 2");
  return c;
}

std::vector<std::int64_t> dual_shape(const CFrac& c) {
  const int p = c.length();
  if (p == 1) return std::vector<std::int64_t>(c.n - 1, 2);

  std::vector<std::int64_t> shape;
  bool merge_pending = false;
  auto push = [&](std::int64_t v) {
    if (merge_pending) {
      shape.back() += v - 2;
      merge_pending = false;
    } else {
      shape.push_back(v);
    }
  };
  auto push_twos = [&](std::int64_t t) {
    if (t < 0) {
      merge_pending = true;  // 2^(-1): fuse the neighbouring entries
      return;
    }
    for (std::int64_t i = 0; i < t; ++i) push(2);
  };

  push_twos(c.terms[0] - 2);
  for (int j = 1; j < p; ++j) {
    push(3);
    push_twos(j + 1 < p ? c.terms[j] - 3 : c.terms[j] - 2);
  }
  if (merge_pending) throw InternalError("dual_shape: dangling contraction");
  return shape;
}

CFrac dual(const CFrac& c) {
  CFrac d = expand(c.n, c.n - c.k);

  // Length and sum dualities.
  const int p = c.length(), pp = d.length();
  std::int64_t sum = 0, sump = 0;
  for (std::int64_t t : c.terms) sum += t;
  for (std::int64_t t : d.terms) sump += t;
  if (pp != sum - 2 * p + 1) throw InternalError("dual: length relation failed");
  if (sump != 2 * sum - 3 * p + 1) throw InternalError("dual: sum relation failed");

  // Partial sums: n_1'+...+n_a' = 2a + b on the stated range
  // n_1+...+n_b - 2b + 1 <= a <= n_1+...+n_{b+1} - 2b - 2, b = 0..p-1.
  std::vector<std::int64_t> ps(pp + 1, 0);
  for (int a = 1; a <= pp; ++a) ps[a] = ps[a - 1] + d.terms[a - 1];
  std::int64_t run = 0;  // n_1+...+n_b
  for (int b = 0; b < p; ++b) {
    std::int64_t lo = run - 2 * b + 1;
    std::int64_t hi = run + c.terms[b] - 2 * b - 2;
    run += c.terms[b];
    for (std::int64_t a = std::max<std::int64_t>(lo, 1); a <= std::min<std::int64_t>(hi, pp); ++a)
      if (ps[a] != 2 * a + b) throw InternalError("dual: partial-sum relation failed");
  }

  if (dual_shape(c) != d.terms) throw InternalError("dual: block shape mismatch");
  return d;
}

std::int64_t inverse_residue(const CFrac& c) {
  std::int64_t kp = det_d_slice(c.terms, 0, c.length() - 1);
  if (kp < 1 || kp >= c.n || (c.k * kp) % c.n != 1)
    throw InternalError("inverse_residue: k k' != 1 mod n");
  return kp;
}

std::vector<std::int64_t> trailing_dets(const CFrac& c) {
  std::vector<std::int64_t> out(c.length());
  for (int j = 0; j < c.length(); ++j) out[j] = det_d_slice(c.terms, j + 1, c.length());
  return out;
}

std::vector<std::int64_t> leading_dets(const CFrac& c) {
  std::vector<std::int64_t> out(c.length());
  for (int j = 0; j < c.length(); ++j) out[j] = det_d_slice(c.terms, 0, j);
  return out;
}

HomConstants hom_constants(const CFrac& c, cplx eta) {
  HomConstants h;
  h.mu = static_cast<double>(c.n) * eta;
  for (std::int64_t t : trailing_dets(c)) h.nu.push_back(static_cast<double>(t) * eta);
  for (std::int64_t t : leading_dets(c)) h.lambda.push_back(static_cast<double>(t) * eta);
  CFrac d = dual(c);
  for (std::int64_t t : leading_dets(d)) h.mu_prime.push_back(static_cast<double>(t) * eta);
  for (std::int64_t t : trailing_dets(d)) h.gamma.push_back(-static_cast<double>(t) * eta);
  return h;
}

}  // namespace ellex
