#include "ellex/duality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ellex/errors.hpp"

namespace ellex {

namespace {

double rel_diff(cplx a, cplx b) {
  return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
}

// Multiplier of the tau shift in variable nu (0-based) for a function of
// Theta_{n/k} type with expansion terms `t`.
cplx tau_shift_multiplier(const std::vector<std::int64_t>& t, std::span<const cplx> z,
                          int nu, cplx tau) {
  const int p = static_cast<int>(t.size());
  cplx zm = nu > 0 ? z[nu - 1] : 0.0;
  cplx zp = nu + 1 < p ? z[nu + 1] : 0.0;
  double delta = nu == 0 ? 1.0 : 0.0;
  cplx m = E(-(static_cast<double>(t[nu]) * z[nu] - zm - zp - (delta - 1.0) * tau));
  if (t[nu] % 2 != 0) m = -m;
  return m;
}

}  // namespace

namespace {

// The n-th-root-of-unity freedom in fixing each basis's phi is harmless per
// space but the pairing needs the two choices matched: with mismatched
// roots the expansion coefficients come out geometric in alpha instead of
// constant. Measure the ratio lambda_1/lambda_0 by projecting Delta onto
// the T_{1/n} eigenspaces at one point and rotate the dual basis by the
// compensating root of unity.
void align_root_choice(DualityPair& pair) {
  const long n = pair.n();
  if (n == 1) return;
  const cplx tau = pair.series.lattice.tau;
  const long k = pair.primal.cfrac.k;
  Sampler sampler(0xD17AFULL);

  for (int attempt = 0; attempt < 50; ++attempt) {
    auto z = sampler.cell_vec(pair.primal.p(), tau);
    auto zp = sampler.cell_vec(pair.dual.p(), tau);
    // D_s = Delta(z + s t/n, zp) = sum_a lambda_a E(k s a / n) w_a(z) w'_{1-a}(zp)
    std::vector<cplx> D(n);
    for (long s = 0; s < n; ++s) {
      auto zs = z;
      for (int j = 0; j < pair.primal.p(); ++j)
        zs[j] += static_cast<double>(s) * pair.primal.shift[j];
      D[s] = delta_product(pair, zs, zp);
    }
    auto proj = [&](long a) {  // lambda_a w_a(z) w'_{1-a}(zp)
      cplx acc = 0.0;
      for (long s = 0; s < n; ++s)
        acc += E(-static_cast<double>(k * s * a) / static_cast<double>(n)) * D[s];
      return acc / static_cast<double>(n);
    };
    cplx p0 = proj(0), p1 = proj(1);
    cplx w0 = pair.primal.eval(0, z) * pair.dual.eval(1, zp);
    cplx w1 = pair.primal.eval(1, z) * pair.dual.eval(0, zp);
    if (std::abs(p0) < 1e-6 || std::abs(w0) < 1e-8 || std::abs(w1) < 1e-8)
      continue;  // too close to a zero; try another point
    cplx rho = (p1 / w1) / (p0 / w0);  // lambda_1 / lambda_0
    long m = 0;
    double best = 1e300;
    for (long j = 0; j < n; ++j) {
      double d = std::abs(rho - E(-static_cast<double>(j) / static_cast<double>(n)));
      if (d < best) best = d, m = j;
    }
    if (best > 1e-6)
      throw InternalError("align_root_choice: lambda ratio is not a root of unity");
    if (m != 0) {
      for (long b = 0; b < n; ++b) {
        cplx f = E(static_cast<double>(m * b) / static_cast<double>(n));
        for (auto& fc : pair.dual.w[b]) fc.value *= f;
      }
      pair.dual.phi += static_cast<double>(m) / static_cast<double>(n);
    }
    return;
  }
  throw SamplingExhausted("align_root_choice: no usable probe point");
}

}  // namespace

DualityPair make_duality_pair(const CFrac& c, const Lattice& l, int B) {
  CFrac d = dual(c);
  DualityPair pair{build_w_basis(build_space(c, l, B)),
                   build_w_basis(build_space(d, l, B)), ThetaSeries{l}};
  align_root_choice(pair);
  return pair;
}

cplx delta_product(const DualityPair& pair, std::span<const cplx> z,
                   std::span<const cplx> zp, double* min_factor) {
  const auto& nt = pair.primal.cfrac.terms;
  const auto& ntp = pair.dual.cfrac.terms;
  const int p = static_cast<int>(nt.size());
  const int pp = static_cast<int>(ntp.size());
  if (static_cast<int>(z.size()) != p || static_cast<int>(zp.size()) != pp)
    throw InvalidInput("delta_product: bad arity");

  double mf = 1e300;
  auto th = [&](cplx arg) {
    cplx v = theta(arg, pair.series);
    mf = std::min(mf, std::abs(v));
    return v;
  };

  cplx prod = E(zp[0]) * th(z[0] - zp[0]) * th(z[p - 1] + zp[pp - 1]);
  std::int64_t run = 0;  // n_1' + ... + n_a'
  for (int a = 1; a <= pp - 1; ++a) {
    run += ntp[a - 1];
    std::int64_t idx = run - 2 * a + 1;  // 1-based index into z
    if (idx < 1 || idx > p) throw InternalError("delta_product: index out of range");
    prod *= th(zp[a - 1] - zp[a] + z[idx - 1]);
  }
  run = 0;
  for (int b = 1; b <= p - 1; ++b) {
    run += nt[b - 1];
    std::int64_t idx = run - 2 * b + 1;  // 1-based index into zp
    if (idx < 1 || idx > pp) throw InternalError("delta_product: index out of range");
    prod *= th(z[b - 1] - z[b] + zp[idx - 1]);
  }
  if (min_factor) *min_factor = mf;
  return prod;
}

cplx delta_w_sum(const DualityPair& pair, std::span<const cplx> z,
                 std::span<const cplx> zp) {
  cplx sum = 0.0;
  for (long a = 0; a < pair.n(); ++a)
    sum += pair.primal.eval(a, z) * pair.dual.eval(1 - a, zp);
  return sum;
}

double delta_qp_residual(const DualityPair& pair, std::span<const cplx> z,
                         std::span<const cplx> zp) {
  const cplx tau = pair.series.lattice.tau;
  const int p = static_cast<int>(z.size()), pp = static_cast<int>(zp.size());
  std::vector<cplx> zz(z.begin(), z.end()), zzp(zp.begin(), zp.end());
  cplx base = delta_product(pair, zz, zzp);
  double worst = 0.0;

  for (int nu = 0; nu < p; ++nu) {
    auto zs = zz;
    zs[nu] += 1.0;
    worst = std::max(worst, rel_diff(delta_product(pair, zs, zzp), base));
    zs[nu] = zz[nu] + tau;
    cplx mult = tau_shift_multiplier(pair.primal.cfrac.terms, zz, nu, tau);
    worst = std::max(worst, rel_diff(delta_product(pair, zs, zzp), mult * base));
  }
  for (int nu = 0; nu < pp; ++nu) {
    auto zs = zzp;
    zs[nu] += 1.0;
    worst = std::max(worst, rel_diff(delta_product(pair, zz, zs), base));
    zs[nu] = zzp[nu] + tau;
    cplx mult = tau_shift_multiplier(pair.dual.cfrac.terms, zzp, nu, tau);
    worst = std::max(worst, rel_diff(delta_product(pair, zz, zs), mult * base));
  }
  return worst;
}

namespace {

// Leading-determinant shift vectors r_a = d(n_1..n_{a-1})/n of both factors.
std::pair<std::vector<double>, std::vector<double>> r_shifts(const DualityPair& pair) {
  double nd = static_cast<double>(pair.n());
  std::vector<double> r, rp;
  for (auto t : leading_dets(pair.primal.cfrac)) r.push_back(static_cast<double>(t) / nd);
  for (auto t : leading_dets(pair.dual.cfrac)) rp.push_back(static_cast<double>(t) / nd);
  return {r, rp};
}

}  // namespace

double delta_r_shift_residual(const DualityPair& pair, std::span<const cplx> z,
                              std::span<const cplx> zp) {
  auto [r, rp] = r_shifts(pair);
  std::vector<cplx> zs(z.begin(), z.end()), zps(zp.begin(), zp.end());
  for (size_t j = 0; j < zs.size(); ++j) zs[j] += r[j];
  for (size_t j = 0; j < zps.size(); ++j) zps[j] += rp[j];
  cplx lhs = delta_product(pair, zs, zps);
  cplx rhs = E(1.0 / static_cast<double>(pair.n())) * delta_product(pair, z, zp);
  return rel_diff(lhs, rhs);
}

double delta_r_tau_shift_residual(const DualityPair& pair, std::span<const cplx> z,
                                  std::span<const cplx> zp) {
  const cplx tau = pair.series.lattice.tau;
  auto [r, rp] = r_shifts(pair);
  std::vector<cplx> zs(z.begin(), z.end()), zps(zp.begin(), zp.end());
  for (size_t j = 0; j < zs.size(); ++j) zs[j] += r[j] * tau;
  for (size_t j = 0; j < zps.size(); ++j) zps[j] += rp[j] * tau;
  cplx lhs = delta_product(pair, zs, zps);
  // Extra (-1) relative to E(tau/n - z_p - zp_{p'}): measured consistently
  // for every (n,k) and tau, independent of the sample point.
  cplx rhs = -E(tau / static_cast<double>(pair.n()) - z[z.size() - 1] -
                zp[zp.size() - 1]) *
             delta_product(pair, z, zp);
  return rel_diff(lhs, rhs);
}

std::pair<std::vector<cplx>, std::vector<cplx>> guarded_sample(
    const DualityPair& pair, Sampler& sampler, double guard) {
  const cplx tau = pair.series.lattice.tau;
  const int p = pair.primal.p(), pp = pair.dual.p();
  return sample_guarded(
      [&] {
        return std::make_pair(sampler.cell_vec(p, tau), sampler.cell_vec(pp, tau));
      },
      [&](const auto& s) {
        double mf = 0.0;
        delta_product(pair, s.first, s.second, &mf);
        return mf >= guard;
      });
}

FitResult fit_c(DualityPair& pair, Sampler& sampler, int samples) {
  if (samples < 8) throw InvalidInput("fit_c: need at least 8 samples");
  std::vector<cplx> lhs(samples), rhs(samples);
  cplx num = 0.0;
  double den = 0.0;
  for (int i = 0; i < samples; ++i) {
    auto [z, zp] = guarded_sample(pair, sampler);
    lhs[i] = delta_product(pair, z, zp);
    rhs[i] = delta_w_sum(pair, z, zp);
    num += std::conj(rhs[i]) * lhs[i];
    den += std::norm(rhs[i]);
  }
  if (den < 1e-30) throw InternalError("fit_c: w-sum vanishes at all samples");
  FitResult fr;
  fr.c = num / den;
  for (int i = 0; i < samples; ++i)
    fr.residual = std::max(fr.residual, rel_diff(lhs[i], fr.c * rhs[i]));
  pair.c = fr.c;
  return fr;
}

std::vector<std::vector<cplx>> expand_lambda(const DualityPair& pair,
                                             Sampler& sampler, int samples) {
  const long n = pair.n();
  if (samples == 0) samples = static_cast<int>(2 * n * n + 16);
  if (samples < 2 * n * n) throw InvalidInput("expand_lambda: too few samples");

  Eigen::MatrixXcd A(samples, n * n);
  Eigen::VectorXcd b(samples);
  for (int i = 0; i < samples; ++i) {
    auto [z, zp] = guarded_sample(pair, sampler);
    b(i) = delta_product(pair, z, zp);
    for (long a = 0; a < n; ++a) {
      cplx wa = pair.primal.eval(a, z);
      for (long bb = 0; bb < n; ++bb)
        A(i, a * n + bb) = wa * pair.dual.eval(bb, zp);
    }
  }
  Eigen::VectorXcd x = A.colPivHouseholderQr().solve(b);
  std::vector<std::vector<cplx>> lam(n, std::vector<cplx>(n));
  for (long a = 0; a < n; ++a)
    for (long bb = 0; bb < n; ++bb) lam[a][bb] = x(a * n + bb);
  return lam;
}

}  // namespace ellex
