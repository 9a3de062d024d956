#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ellex/duality.hpp"
#include "ellex/errors.hpp"

using namespace ellex;

namespace {

const std::vector<std::pair<long, long>> kPairs = {
    {2, 1}, {3, 1}, {3, 2}, {4, 3}, {5, 2}};

double rel(cplx a, cplx b) { return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

TEST_CASE("product formula satisfies all shift laws") {
  for (cplx tau : {cplx(0.0, 1.0), cplx(0.3, 1.1)}) {
    Lattice l{tau};
    Sampler s(101);
    for (auto [n, k] : kPairs) {
      DualityPair pair = make_duality_pair(expand(n, k), l);
      for (int rep = 0; rep < 6; ++rep) {
        auto z = s.cell_vec(pair.primal.p(), tau);
        auto zp = s.cell_vec(pair.dual.p(), tau);
        CHECK(delta_qp_residual(pair, z, zp) < 1e-9);
        CHECK(delta_r_shift_residual(pair, z, zp) < 1e-9);
        CHECK(delta_r_tau_shift_residual(pair, z, zp) < 1e-9);
      }
    }
  }
}

TEST_CASE("scalar fit reproduces the product at fresh samples") {
  Lattice l{cplx(0.0, 1.0)};
  for (auto [n, k] : kPairs) {
    DualityPair pair = make_duality_pair(expand(n, k), l);
    Sampler fit_s(202);
    FitResult fr = fit_c(pair, fit_s);
    CHECK(std::abs(fr.c) > 0.0);
    CHECK(fr.residual < 1e-7);

    Sampler fresh(303);
    for (int i = 0; i < 20; ++i) {
      auto [z, zp] = guarded_sample(pair, fresh);
      cplx lhs = delta_product(pair, z, zp);
      cplx rhs = pair.c * delta_w_sum(pair, z, zp);
      CHECK(rel(lhs, rhs) < 1e-7);
      // Negative control: a 1% perturbation of c is clearly visible.
      CHECK(rel(lhs, 1.01 * pair.c * delta_w_sum(pair, z, zp)) > 1e-4);
    }
  }
}

TEST_CASE("fit covariance under basis rescaling") {
  Lattice l{cplx(0.0, 1.0)};
  DualityPair pair = make_duality_pair(expand(5, 2), l);
  Sampler s1(404);
  cplx c0 = fit_c(pair, s1).c;

  DualityPair scaled = pair;
  const cplx s = 2.0;
  for (auto& t : scaled.primal.w)
    for (auto& fc : t) fc.value *= s;
  for (auto& t : scaled.dual.w)
    for (auto& fc : t) fc.value *= s;
  Sampler s2(404);
  cplx c1 = fit_c(scaled, s2).c;
  CHECK(rel(c1, c0 / (s * s)) < 1e-9);
}

TEST_CASE("full expansion is diagonal with constant coefficient") {
  Lattice l{cplx(0.0, 1.0)};
  for (auto [n, k] : kPairs) {
    DualityPair pair = make_duality_pair(expand(n, k), l);
    Sampler s(505);
    auto lam = expand_lambda(pair, s);
    double diag_scale = 0.0;
    for (long a = 0; a < n; ++a)
      diag_scale = std::max(diag_scale, std::abs(lam[a][mod_n(1 - a, n)]));
    REQUIRE(diag_scale > 0.0);
    cplx first = lam[0][mod_n(1, n)];
    for (long a = 0; a < n; ++a)
      for (long b = 0; b < n; ++b) {
        if (mod_n(a + b, n) == 1) {
          CHECK(std::abs(lam[a][b] - first) < 1e-6 * diag_scale);
        } else {
          CHECK(std::abs(lam[a][b]) < 1e-6 * diag_scale);
        }
      }
    // The surviving coefficient is the scalar-fit constant.
    Sampler s2(606);
    cplx c = fit_c(pair, s2).c;
    CHECK(std::abs(first - c) < 1e-6 * std::abs(c));
  }
}

TEST_CASE("input validation") {
  Lattice l{cplx(0.0, 1.0)};
  DualityPair pair = make_duality_pair(expand(3, 2), l);
  std::vector<cplx> z(2, 0.1), zp(1, 0.1);
  CHECK_THROWS_AS(delta_product(pair, zp, zp), InvalidInput);
  Sampler s(1);
  CHECK_THROWS_AS(fit_c(pair, s, 4), InvalidInput);
}
