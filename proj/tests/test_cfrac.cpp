#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "ellex/cfrac.hpp"
#include "ellex/errors.hpp"

using namespace ellex;

TEST_CASE("expansion of known fractions") {
  CHECK(expand(2, 1).terms == std::vector<std::int64_t>{2});
  CHECK(expand(3, 1).terms == std::vector<std::int64_t>{3});
  CHECK(expand(3, 2).terms == std::vector<std::int64_t>{2, 2});
  CHECK(expand(4, 3).terms == std::vector<std::int64_t>{2, 2, 2});
  CHECK(expand(5, 2).terms == std::vector<std::int64_t>{3, 2});
  CHECK(expand(5, 3).terms == std::vector<std::int64_t>{2, 3});
  CHECK(expand(12, 5).terms == std::vector<std::int64_t>{3, 2, 3});
}

TEST_CASE("round trip and term bounds for all coprime pairs up to 40") {
  for (std::int64_t n = 2; n <= 40; ++n)
    for (std::int64_t k = 1; k < n; ++k) {
      if (std::gcd(n, k) != 1) continue;
      CFrac c = expand(n, k);
      REQUIRE(det_d(c.terms) == n);
      REQUIRE(det_d_slice(c.terms, 1, c.length()) == k);
      for (auto t : c.terms) REQUIRE(t >= 2);
    }
}

TEST_CASE("determinant recursion") {
  // d(m_1,...,m_q) = m_1 d(m_2,...,m_q) - d(m_3,...,m_q), from both ends.
  std::vector<std::int64_t> m{3, 2, 4, 2, 5, 3};
  for (int first = 0; first + 2 <= (int)m.size(); ++first) {
    auto q = (int)m.size();
    CHECK(det_d_slice(m, first, q) ==
          m[first] * det_d_slice(m, first + 1, q) - det_d_slice(m, first + 2, q));
  }
  CHECK(det_d({}) == 1);
  CHECK(det_d({7}) == 7);
}

TEST_CASE("bad input is rejected") {
  CHECK_THROWS_AS(expand(4, 2), InvalidInput);   // not coprime
  CHECK_THROWS_AS(expand(6, 3), InvalidInput);   // not coprime
  CHECK_THROWS_AS(expand(5, 0), InvalidInput);   // k out of range
  CHECK_THROWS_AS(expand(5, 5), InvalidInput);   // k out of range
  CHECK_THROWS_AS(expand(1, 1), InvalidInput);   // n too small
  CHECK_THROWS_AS(expand(65, 2), InvalidInput);  // n above cap
}

TEST_CASE("duality relations hold for all coprime pairs up to 40") {
  // dual() itself cross-checks length, sum, partial sums and the block
  // shape; here we additionally check the involution and k k' = 1 mod n.
  for (std::int64_t n = 2; n <= 40; ++n)
    for (std::int64_t k = 1; k < n; ++k) {
      if (std::gcd(n, k) != 1) continue;
      CFrac c = expand(n, k);
      CFrac d = dual(c);
      REQUIRE(d.n == n);
      REQUIRE(d.k == n - k);
      REQUIRE(dual(d).terms == c.terms);
      std::int64_t kp = inverse_residue(c);
      REQUIRE(mod_n(k * kp, n) == 1);
    }
}

TEST_CASE("dual shape of (5,2) and (2,1)") {
  CHECK(dual(expand(5, 2)).terms == std::vector<std::int64_t>{2, 3});
  CHECK(dual(expand(2, 1)).terms == std::vector<std::int64_t>{2});
  CHECK(dual(expand(3, 1)).terms == std::vector<std::int64_t>{2, 2});
  // (n,1): dual expansion is n-1 twos.
  CHECK(dual(expand(7, 1)).terms == std::vector<std::int64_t>(6, 2));
}

TEST_CASE("shift constants for (5,2)") {
  cplx eta(0.17, 0.11);
  HomConstants h = hom_constants(expand(5, 2), eta);
  CHECK(h.mu == 5.0 * eta);
  REQUIRE(h.nu.size() == 2);
  CHECK(h.nu[0] == 2.0 * eta);  // d(n_2) = 2
  CHECK(h.nu[1] == 1.0 * eta);  // d() = 1
  REQUIRE(h.lambda.size() == 2);
  CHECK(h.lambda[0] == 1.0 * eta);  // d() = 1
  CHECK(h.lambda[1] == 3.0 * eta);  // d(n_1) = 3
  // dual is (2,3)
  REQUIRE(h.mu_prime.size() == 2);
  CHECK(h.mu_prime[0] == 1.0 * eta);
  CHECK(h.mu_prime[1] == 2.0 * eta);
  REQUIRE(h.gamma.size() == 2);
  CHECK(h.gamma[0] == -3.0 * eta);
  CHECK(h.gamma[1] == -1.0 * eta);
}
