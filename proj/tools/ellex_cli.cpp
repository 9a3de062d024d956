// Command-line front end: run individual constructions, residual
// verification suites, and JSON exports of the computed objects.
//
// Exit codes: 0 pass, 1 residual failure, 2 invalid input, 3 sampling
// exhausted, 4 I/O error.

#include <CLI11.hpp>
#include <chrono>
#include <deque>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "ellex/cfrac.hpp"
#include "ellex/duality.hpp"
#include "ellex/errors.hpp"
#include "ellex/homs.hpp"
#include "ellex/rmatrix.hpp"
#include "ellex/sampling.hpp"
#include "ellex/theta.hpp"
#include "ellex/thetap.hpp"

using json = nlohmann::ordered_json;
using namespace ellex;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitResidual = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitSampling = 3;
constexpr int kExitIo = 4;

// "re", "imi", "re+imi", "re-imi" (i suffix on the imaginary part).
cplx parse_complex(const std::string& s) {
  const char* p = s.c_str();
  char* end = nullptr;
  double first = std::strtod(p, &end);
  if (end == p) throw InvalidInput("cannot parse complex number: " + s);
  if (*end == 'i') {
    if (end[1] != '\0') throw InvalidInput("trailing junk in complex: " + s);
    return cplx(0.0, first);
  }
  if (*end == '\0') return cplx(first, 0.0);
  const char* q = end;
  double second = std::strtod(q, &end);
  if (end == q || *end != 'i' || end[1] != '\0')
    throw InvalidInput("cannot parse complex number: " + s);
  return cplx(first, second);
}

json jc(cplx z) { return json::array({z.real(), z.imag()}); }

json jcvec(std::span<const cplx> z) {
  json a = json::array();
  for (cplx zj : z) a.push_back(jc(zj));
  return a;
}

struct RunConfig {
  long n = 3;
  long k = 2;
  std::string tau_str = "0+1i";
  std::string eta_str = "0.17+0.11i";
  std::uint64_t seed = 1;
  int samples = 20;
  double tol = 1e-7;
  std::string mode_str = "elliptic";
  std::string suite = "all";
  std::string out;

  cplx tau() const { return parse_complex(tau_str); }
  cplx eta() const { return parse_complex(eta_str); }
  DegenerationMode mode() const {
    if (mode_str == "elliptic") return DegenerationMode::elliptic;
    if (mode_str == "trigonometric") return DegenerationMode::trigonometric;
    if (mode_str == "rational") return DegenerationMode::rational;
    throw InvalidInput("unknown mode: " + mode_str);
  }
};

struct Check {
  std::string name;
  int samples = 0;
  double max_residual = 0.0;
  json worst_point = json::object();

  void update(double r, json point) {
    ++samples;
    if (r > max_residual) {
      max_residual = r;
      worst_point = std::move(point);
    }
  }
};

struct SuiteContext {
  RunConfig cfg;
  Lattice lattice;
  ThetaSeries series;
  std::deque<Check> checks;  // deque: Check& stays valid across later pushes

  explicit SuiteContext(const RunConfig& c)
      : cfg(c), lattice(c.tau()), series(lattice) {}

  Check& check(const std::string& name) {
    checks.push_back(Check{name});
    return checks.back();
  }
};

// ---------------------------------------------------------------- suites

void suite_theta(SuiteContext& ctx) {
  const cplx tau = ctx.lattice.tau;
  const long n = ctx.cfg.n;
  const double nd = static_cast<double>(n);
  Sampler s(ctx.cfg.seed);

  ctx.check("theta_zero").update(std::abs(theta(0.0, ctx.series)), {{"z", jc(0.0)}});

  Check& odd = ctx.check("theta_oddness");
  Check& qp = ctx.check("theta_quasi_periodicity");
  Check& al = ctx.check("theta_alpha_operator_relations");
  Check& id1 = ctx.check("product_identity");
  for (int i = 0; i < ctx.cfg.samples; ++i) {
    cplx z = s.cell(tau);
    json pt = {{"z", jc(z)}};
    cplx t0 = theta(z, ctx.series);
    odd.update(std::abs(theta(-z, ctx.series) + E(-z) * t0) / (1.0 + std::abs(t0)), pt);
    double r = std::abs(theta(z + 1.0, ctx.series) - t0) / (1.0 + std::abs(t0));
    cplx expect = -E(-z) * t0;
    r = std::max(r, std::abs(theta(z + tau, ctx.series) - expect) /
                        (1.0 + std::abs(expect)));
    qp.update(r, pt);

    double ra = 0.0;
    for (long a = 0; a < n; ++a) {
      cplx v = theta_alpha(a, z, n, ctx.series);
      ra = std::max(ra, std::abs(theta_alpha(a, z + 1.0, n, ctx.series) - v) /
                            (1.0 + std::abs(v)));
      cplx eig = E(static_cast<double>(a) / nd) * v;
      ra = std::max(ra, std::abs(theta_alpha(a, z + 1.0 / nd, n, ctx.series) - eig) /
                            (1.0 + std::abs(eig)));
      cplx shifted = E(z + 1.0 / (2.0 * nd) - (nd - 1.0) / (2.0 * nd) * tau) *
                     theta_alpha(a, z + tau / nd, n, ctx.series);
      cplx next = theta_alpha(a + 1, z, n, ctx.series);
      ra = std::max(ra, std::abs(shifted - next) / (1.0 + std::abs(next)));
    }
    al.update(ra, pt);
    id1.update(identity1_residual(z, n, ctx.series), pt);
  }
}

// tau-shift multiplier of variable nu, transcribed from the defining law.
cplx space_shift_multiplier(const CFrac& c, std::span<const cplx> z, int nu,
                            cplx tau) {
  const int p = c.length();
  cplx zm = nu > 0 ? z[nu - 1] : 0.0;
  cplx zp = nu + 1 < p ? z[nu + 1] : 0.0;
  double delta = nu == 0 ? 1.0 : 0.0;
  cplx m = E(-(static_cast<double>(c.terms[nu]) * z[nu] - zm - zp -
               (delta - 1.0) * tau));
  if (c.terms[nu] % 2 != 0) m = -m;
  return m;
}

void suite_space(SuiteContext& ctx) {
  const cplx tau = ctx.lattice.tau;
  CFrac c = expand(ctx.cfg.n, ctx.cfg.k);
  MultiThetaSpace sp = build_space(c, ctx.lattice);
  WBasis wb = build_w_basis(sp);
  const int p = c.length();
  const long n = c.n;
  const double nd = static_cast<double>(n);
  Sampler s(ctx.cfg.seed);

  ctx.check("coset_count")
      .update(std::abs(static_cast<double>(sp.coset_reps.size()) - nd), {});

  Check& qp = ctx.check("basis_quasi_periodicity");
  Check& eig = ctx.check("w_t1n_eigenrelation");
  Check& cyc = ctx.check("w_ttn_cycling");
  for (int rep = 0; rep < ctx.cfg.samples; ++rep) {
    auto z = s.cell_vec(p, tau);
    json pt = {{"z", jcvec(z)}};
    for (int ci = 0; ci < n; ++ci) {
      cplx f = sp.evaluate(ci, z);
      double r = 0.0;
      for (int nu = 0; nu < p; ++nu) {
        auto zs = z;
        zs[nu] += 1.0;
        r = std::max(r, std::abs(sp.evaluate(ci, zs) - f) / (1.0 + std::abs(f)));
        zs = z;
        zs[nu] += tau;
        cplx rhs = space_shift_multiplier(c, z, nu, tau) * f;
        r = std::max(r, std::abs(sp.evaluate(ci, zs) - rhs) /
                            (1.0 + std::abs(rhs)));
      }
      qp.update(r, pt);
    }
    for (long a = 0; a < n; ++a) {
      cplx w = wb.eval(a, z);
      std::vector<cplx> zs = z;
      for (int j = 0; j < p; ++j) zs[j] += wb.shift[j];
      cplx expect = E(static_cast<double>(ctx.cfg.k) * static_cast<double>(a) / nd) * w;
      eig.update(std::abs(wb.eval(a, zs) - expect) / (1.0 + std::abs(expect)), pt);
      std::vector<cplx> zt = z;
      for (int j = 0; j < p; ++j) zt[j] += wb.shift[j] * tau;
      cplx next = E(z[0] + wb.phi) * wb.eval(a, zt);
      cplx wn = wb.eval(a + 1, z);
      cyc.update(std::abs(next - wn) / (1.0 + std::abs(wn)), pt);
    }
  }
}

void suite_duality(SuiteContext& ctx) {
  const cplx tau = ctx.lattice.tau;
  DualityPair pair = make_duality_pair(expand(ctx.cfg.n, ctx.cfg.k), ctx.lattice);
  Sampler s(ctx.cfg.seed);

  Check& qp = ctx.check("product_shift_laws");
  Check& rs = ctx.check("simultaneous_r_shift");
  Check& rt = ctx.check("simultaneous_r_tau_shift");
  for (int rep = 0; rep < ctx.cfg.samples; ++rep) {
    auto z = s.cell_vec(pair.primal.p(), tau);
    auto zp = s.cell_vec(pair.dual.p(), tau);
    json pt = {{"z", jcvec(z)}, {"zp", jcvec(zp)}};
    qp.update(delta_qp_residual(pair, z, zp), pt);
    rs.update(delta_r_shift_residual(pair, z, zp), pt);
    rt.update(delta_r_tau_shift_residual(pair, z, zp), pt);
  }

  Sampler fs(ctx.cfg.seed + 1);
  FitResult fr = fit_c(pair, fs);
  ctx.check("pairing_fit").update(fr.residual, {{"c", jc(fr.c)}});
  Check& fresh = ctx.check("pairing_fresh_samples");
  for (int rep = 0; rep < ctx.cfg.samples; ++rep) {
    auto [z, zp] = guarded_sample(pair, s);
    cplx lhs = delta_product(pair, z, zp);
    cplx rhs = pair.c * delta_w_sum(pair, z, zp);
    fresh.update(std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs)),
                 {{"z", jcvec(z)}, {"zp", jcvec(zp)}});
  }

  // Full expansion: support on alpha + beta = 1 with a constant coefficient.
  Sampler ls(ctx.cfg.seed + 2);
  auto lam = expand_lambda(pair, ls);
  const long n = pair.n();
  double diag_scale = 0.0;
  for (long a = 0; a < n; ++a)
    diag_scale = std::max(diag_scale, std::abs(lam[a][mod_n(1 - a, n)]));
  Check& sup = ctx.check("lambda_offdiagonal_support");
  Check& con = ctx.check("lambda_constancy");
  cplx first = lam[0][mod_n(1, n)];
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b) {
      json pt = {{"alpha", a}, {"beta", b}};
      if (mod_n(a + b, n) == 1)
        con.update(std::abs(lam[a][b] - first) / diag_scale, pt);
      else
        sup.update(std::abs(lam[a][b]) / diag_scale, pt);
    }
}

cplx guarded_point(const RMatrixSpec& spec, Sampler& s) {
  return sample_guarded(
      [&] { return s.cell(spec.lattice.tau); },
      [&](cplx z) {
        return dist_to_nth_lattice(z, spec.lattice.tau, spec.n) > 4.0 * spec.guard;
      });
}

void suite_ybe(SuiteContext& ctx) {
  RMatrixSpec spec = make_rmatrix_spec(ctx.cfg.n, ctx.cfg.k, ctx.lattice,
                                       ctx.cfg.eta());
  const long n = spec.n;
  Sampler s(ctx.cfg.seed);

  // Support pattern is exact: worst off-support magnitude, relative to the
  // largest entry.
  RTensor t = r_entries(spec, guarded_point(spec, s), guarded_point(spec, s));
  double peak = 0.0, off = 0.0, on_min = 1e300;
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b)
      for (long c = 0; c < n; ++c)
        for (long d = 0; d < n; ++d) {
          double m = std::abs(t.at(a, b, c, d));
          peak = std::max(peak, m);
          if (mod_n(a + b - c - d, n) != 0)
            off = std::max(off, m);
          else
            on_min = std::min(on_min, m);
        }
  ctx.check("support_offpattern").update(off / peak, {{"u", jc(t.u)}, {"v", jc(t.v)}});
  ctx.check("support_onpattern_nonzero")
      .update(on_min > 0.0 ? 0.0 : 1.0, {{"u", jc(t.u)}, {"v", jc(t.v)}});

  Check& ybe = ctx.check("yang_baxter");
  for (int i = 0; i < ctx.cfg.samples; ++i) {
    auto triple = sample_guarded(
        [&] {
          return std::array<cplx, 3>{guarded_point(spec, s),
                                     guarded_point(spec, s),
                                     guarded_point(spec, s)};
        },
        [&](const std::array<cplx, 3>& w) {
          for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
              if (dist_to_nth_lattice(w[b] - w[a], ctx.lattice.tau, n) <=
                  4.0 * spec.guard)
                return false;
          return true;
        });
    ybe.update(ybe_residual(spec, triple[0], triple[1], triple[2]),
               {{"u", jc(triple[0])}, {"v", jc(triple[1])}, {"w", jc(triple[2])}});
  }

  // Shift-degenerate limit: permutation-phase form (worst over two (mu,nu)).
  Check& lim = ctx.check("degenerate_eta_limit");
  cplx u(0.13, 0.05), v(0.57, 0.02);
  lim.update(degenerate_eta_check(n, ctx.cfg.k, ctx.lattice, 1, 0, u, v),
             {{"mu", 1}, {"nu", 0}});
  lim.update(degenerate_eta_check(n, ctx.cfg.k, ctx.lattice, 1, 1, u, v),
             {{"mu", 1}, {"nu", 1}});
}

void suite_unitarity(SuiteContext& ctx) {
  RMatrixSpec spec = make_rmatrix_spec(ctx.cfg.n, ctx.cfg.k, ctx.lattice,
                                       ctx.cfg.eta());
  Sampler s(ctx.cfg.seed);
  Check& uni = ctx.check("unitarity_scalar_fitted");
  Check& sym = ctx.check("unitarity_scalar_symmetry");
  for (int i = 0; i < ctx.cfg.samples; ++i) {
    auto [u, v] = sample_guarded(
        [&] { return std::make_pair(s.cell(ctx.lattice.tau), s.cell(ctx.lattice.tau)); },
        [&](const std::pair<cplx, cplx>& pr) {
          return dist_to_nth_lattice(pr.second - pr.first, ctx.lattice.tau,
                                     spec.n) > 4.0 * spec.guard;
        });
    json pt = {{"u", jc(u)}, {"v", jc(v)}};
    UnitarityResult r = unitarity_residual(spec, u, v);
    uni.update(r.fitted / (1.0 + std::abs(r.s)), pt);
    UnitarityResult r2 = unitarity_residual(spec, v, u);
    sym.update(std::abs(r.s - r2.s) / (1.0 + std::abs(r.s)), pt);
  }
}

void suite_identity2(SuiteContext& ctx) {
  const cplx tau = ctx.lattice.tau;
  CFrac c = expand(ctx.cfg.n, ctx.cfg.k);
  WBasis wb = build_w_basis(build_space(c, ctx.lattice));
  Sampler s(ctx.cfg.seed);
  Check& id2 = ctx.check("master_identity");
  for (int rep = 0; rep < ctx.cfg.samples; ++rep) {
    cplx u = s.cell(tau), v = s.cell(tau);
    auto y = s.cell_vec(c.length(), tau);
    auto z = s.cell_vec(c.length(), tau);
    json pt = {{"u", jc(u)}, {"v", jc(v)}, {"y", jcvec(y)}, {"z", jcvec(z)}};
    for (long a = 0; a < c.n; ++a)
      for (long b = 0; b < c.n; ++b)
        id2.update(identity2_residual(wb, ctx.cfg.eta(), u, v, y, z, a, b), pt);
  }
}

void suite_phi(SuiteContext& ctx) {
  const cplx tau = ctx.lattice.tau;
  CFrac c = expand(ctx.cfg.n, ctx.cfg.k);
  std::vector<long> m(c.terms.begin(), c.terms.end());
  Sampler s(ctx.cfg.seed);

  if (ctx.cfg.mode() == DegenerationMode::elliptic) {
    WBasis wb = build_w_basis(build_space(c, ctx.lattice));
    XAlgebraSpec spec = make_x_algebra_spec(c, ctx.lattice, m, ctx.cfg.eta());
    Check& phi = ctx.check("phi_intertwiner");
    for (int rep = 0; rep < ctx.cfg.samples; ++rep) {
      cplx u = s.cell(tau), v = s.cell(tau);
      std::vector<std::vector<cplx>> y(c.length());
      for (int j = 0; j < c.length(); ++j) y[j] = s.cell_vec(m[j], tau);
      json pt = {{"u", jc(u)}, {"v", jc(v)}};
      for (long a = 0; a < c.n; ++a)
        for (long b = 0; b < c.n; ++b)
          phi.update(phi_residual_all(spec, wb, u, v, y, a, b), pt);
    }
    return;
  }

  // Degenerate kernels: closure of the exchange over the monomial family
  // and the Yang-Baxter equation for the fitted coefficient tensors.
  XAlgebraSpec spec = make_x_algebra_spec(c, ctx.lattice, m, ctx.cfg.eta(),
                                          ctx.cfg.mode());
  MonomialBasis mb = make_monomial_basis(c, ctx.cfg.mode());
  Check& fitc = ctx.check("degenerate_exchange_closure");
  Check& ybe = ctx.check("degenerate_yang_baxter");
  auto pt3 = [&s] { return cplx(s.uniform(), 0.25 * s.uniform()); };
  int rounds = std::max(1, ctx.cfg.samples / 4);
  for (int rep = 0; rep < rounds; ++rep) {
    cplx u = pt3(), v = pt3(), w3 = pt3();
    json pt = {{"u", jc(u)}, {"v", jc(v)}, {"w", jc(w3)}};
    Sampler f1(ctx.cfg.seed + 1), f2(ctx.cfg.seed + 2), f3(ctx.cfg.seed + 3);
    ExchangeFit fuv = monomial_exchange_fit(spec, mb, u, v, f1);
    ExchangeFit fuw = monomial_exchange_fit(spec, mb, u, w3, f2);
    ExchangeFit fvw = monomial_exchange_fit(spec, mb, v, w3, f3);
    fitc.update(fuv.fit_residual, pt);
    fitc.update(fuw.fit_residual, pt);
    fitc.update(fvw.fit_residual, pt);
    ybe.update(ybe_residual(fuv.rhat, fuw.rhat, fvw.rhat), pt);
  }
}

void suite_psi(SuiteContext& ctx) {
  const cplx tau = ctx.lattice.tau;
  CFrac c = expand(ctx.cfg.n, ctx.cfg.k);
  YAlgebraSpec spec = make_y_algebra_spec(c, ctx.lattice, ctx.cfg.eta());
  WBasis dual_w = build_w_basis(build_space(spec.dualCfrac, ctx.lattice));
  Sampler s(ctx.cfg.seed);
  Check& psi = ctx.check("psi_intertwiner");
  for (int rep = 0; rep < ctx.cfg.samples; ++rep) {
    YSample ys{s.cell(tau), s.cell(tau), s.cell_vec(spec.pp(), tau),
               s.cell_vec(spec.pp(), tau)};
    json pt = {{"u", jc(ys.u)}, {"v", jc(ys.v)}};
    for (long g = 0; g < c.n; ++g)
      for (long d = 0; d < c.n; ++d)
        psi.update(psi_residual(spec, dual_w, ys, g, d), pt);
  }
}

void suite_composition(SuiteContext& ctx) {
  const cplx tau = ctx.lattice.tau;
  DualityPair pair = make_duality_pair(
      expand(ctx.cfg.n, ctx.cfg.n - ctx.cfg.k), ctx.lattice);
  Sampler fs(ctx.cfg.seed + 1);
  fit_c(pair, fs);
  Sampler s(ctx.cfg.seed);
  Check& comp = ctx.check("composition_kernel");
  for (int rep = 0; rep < ctx.cfg.samples; ++rep) {
    cplx u = s.cell(tau);
    auto uvec = s.cell_vec(pair.primal.p(), tau);
    auto yA = s.cell_vec(pair.dual.p(), tau);
    comp.update(composition_check(pair, u, uvec, yA),
                {{"u", jc(u)}, {"uvec", jcvec(uvec)}, {"yA", jcvec(yA)}});
  }
}

// ---------------------------------------------------------------- commands

int cmd_cfrac(long n, long k) {
  CFrac c = expand(n, k);
  CFrac d = dual(c);
  auto print_terms = [](const char* label, const CFrac& f) {
    std::printf("%s = [", label);
    for (size_t i = 0; i < f.terms.size(); ++i)
      std::printf("%s%lld", i ? "," : "", static_cast<long long>(f.terms[i]));
    std::printf("]\n");
  };
  std::printf("n=%ld k=%ld\n", n, k);
  print_terms("terms", c);
  print_terms("dual", d);
  std::printf("p=%d p'=%d\n", c.length(), d.length());
  std::printf("k'=%lld (k k' == 1 mod n)\n",
              static_cast<long long>(inverse_residue(c)));
  return kExitPass;
}

int cmd_verify(const RunConfig& cfg) {
  using Runner = void (*)(SuiteContext&);
  const std::vector<std::pair<std::string, Runner>> table = {
      {"theta", suite_theta},       {"space", suite_space},
      {"duality", suite_duality},   {"ybe", suite_ybe},
      {"unitarity", suite_unitarity}, {"identity2", suite_identity2},
      {"phi", suite_phi},           {"psi", suite_psi},
      {"composition", suite_composition}};

  std::vector<std::pair<std::string, Runner>> run;
  for (const auto& e : table)
    if (cfg.suite == "all" || cfg.suite == e.first) run.push_back(e);
  if (run.empty()) throw InvalidInput("unknown suite: " + cfg.suite);

  auto t0 = std::chrono::steady_clock::now();
  SuiteContext ctx(cfg);
  for (const auto& [name, fn] : run) fn(ctx);
  auto t1 = std::chrono::steady_clock::now();

  bool pass = true;
  json checks = json::array();
  for (const Check& c : ctx.checks) {
    if (c.max_residual >= cfg.tol) pass = false;
    checks.push_back({{"name", c.name},
                      {"samples", c.samples},
                      {"max_residual", c.max_residual},
                      {"worst_point", c.worst_point}});
  }
  json report = {
      {"suite", cfg.suite},
      {"params",
       {{"n", cfg.n},
        {"k", cfg.k},
        {"tau", jc(cfg.tau())},
        {"eta", jc(cfg.eta())},
        {"seed", cfg.seed},
        {"samples", cfg.samples},
        {"tol", cfg.tol},
        {"mode", cfg.mode_str}}},
      {"checks", checks},
      {"pass", pass},
      {"elapsed_ms",
       std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()}};

  std::string text = report.dump(2);
  text += "\n";
  if (cfg.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    f << text;
    if (!f.good()) {
      std::fprintf(stderr, "error: cannot write %s\n", cfg.out.c_str());
      return kExitIo;
    }
  }
  return pass ? kExitPass : kExitResidual;
}

int cmd_export(const RunConfig& cfg, const std::string& what,
               const std::string& u_str, const std::string& v_str) {
  json out;
  if (what == "w-basis") {
    CFrac c = expand(cfg.n, cfg.k);
    WBasis wb = build_w_basis(build_space(c, Lattice{cfg.tau()}));
    out["object"] = "w-basis";
    out["n"] = c.n;
    out["k"] = c.k;
    out["tau"] = jc(cfg.tau());
    out["phi"] = jc(wb.phi);
    out["shift"] = wb.shift;
    json tables = json::array();
    for (const CoeffTable& t : wb.w) {
      json tab = json::array();
      for (const FourierCoeff& fc : t)
        tab.push_back({{"index", fc.index}, {"value", jc(fc.value)}});
      tables.push_back(tab);
    }
    out["tables"] = tables;
  } else if (what == "r-tensor") {
    RMatrixSpec spec = make_rmatrix_spec(cfg.n, cfg.k, Lattice{cfg.tau()},
                                         cfg.eta());
    cplx u = parse_complex(u_str), v = parse_complex(v_str);
    RTensor t = r_entries(spec, u, v);
    out["object"] = "r-tensor";
    out["n"] = spec.n;
    out["k"] = spec.k;
    out["tau"] = jc(cfg.tau());
    out["eta"] = jc(cfg.eta());
    out["u"] = jc(u);
    out["v"] = jc(v);
    json e = json::array();
    for (cplx z : t.e) e.push_back(jc(z));
    out["entries"] = e;
  } else {
    throw InvalidInput("unknown export target: " + what);
  }

  std::string text = out.dump(2);
  text += "\n";
  if (cfg.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    f << text;
    if (!f.good()) {
      std::fprintf(stderr, "error: cannot write %s\n", cfg.out.c_str());
      return kExitIo;
    }
  }
  return kExitPass;
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--n", cfg.n, "order n");
  cmd->add_option("--k", cfg.k, "residue k, coprime to n");
  cmd->add_option("--tau", cfg.tau_str, "lattice parameter, re+imi");
  cmd->add_option("--eta", cfg.eta_str, "shift parameter, re+imi");
  cmd->add_option("--seed", cfg.seed, "RNG seed");
  cmd->add_option("--samples", cfg.samples, "sample points per check");
  cmd->add_option("--tol", cfg.tol, "residual tolerance");
  cmd->add_option("--mode", cfg.mode_str,
                  "kernel mode: elliptic|trigonometric|rational");
  cmd->add_option("--out", cfg.out, "output file (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elliptic exchange-algebra constructions and residual checks"};
  app.require_subcommand(1);

  long cf_n = 0, cf_k = 0;
  CLI::App* cfrac_cmd =
      app.add_subcommand("cfrac", "negative-regular expansion of n/k");
  cfrac_cmd->add_option("n", cf_n, "numerator")->required();
  cfrac_cmd->add_option("k", cf_k, "denominator")->required();

  RunConfig vcfg;
  CLI::App* verify_cmd = app.add_subcommand("verify", "run a residual suite");
  add_common_flags(verify_cmd, vcfg);
  verify_cmd->add_option(
      "--suite", vcfg.suite,
      "theta|space|duality|ybe|unitarity|identity2|phi|psi|composition|all");

  RunConfig ecfg;
  std::string what, u_str = "0.1", v_str = "0.3";
  CLI::App* export_cmd = app.add_subcommand("export", "write an object as JSON");
  export_cmd->add_option("what", what, "w-basis|r-tensor")->required();
  add_common_flags(export_cmd, ecfg);
  export_cmd->add_option("--u", u_str, "first spectral point (r-tensor)");
  export_cmd->add_option("--v", v_str, "second spectral point (r-tensor)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitInvalid;
  }

  try {
    if (cfrac_cmd->parsed()) return cmd_cfrac(cf_n, cf_k);
    if (verify_cmd->parsed()) return cmd_verify(vcfg);
    if (export_cmd->parsed()) return cmd_export(ecfg, what, u_str, v_str);
  } catch (const SamplingExhausted& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSampling;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
  return kExitInvalid;
}
