#include "ellex/thetap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <map>

#include "ellex/errors.hpp"

namespace ellex {

namespace {

bool index_less(const IVec& a, const IVec& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Row nu of the recurrence lattice: n_nu e_nu - e_{nu-1} - e_{nu+1}.
std::vector<IVec> lattice_rows(const CFrac& c) {
  const int p = c.length();
  std::vector<IVec> rows(p, IVec(p, 0));
  for (int nu = 0; nu < p; ++nu) {
    rows[nu][nu] = static_cast<int>(c.terms[nu]);
    if (nu > 0) rows[nu][nu - 1] = -1;
    if (nu + 1 < p) rows[nu][nu + 1] = -1;
  }
  return rows;
}

// Adjugate of the symmetric tridiagonal matrix with diagonal (n_1..n_p):
// adj[i][j] = d(n_1..n_{min-1}) d(n_{max+1}..n_p), 0-based slices.
std::vector<std::vector<std::int64_t>> adjugate(const CFrac& c) {
  const int p = c.length();
  std::vector<std::vector<std::int64_t>> adj(p, std::vector<std::int64_t>(p));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      int lo = std::min(i, j), hi = std::max(i, j);
      adj[i][j] = det_d_slice(c.terms, 0, lo) * det_d_slice(c.terms, hi + 1, p);
    }
  return adj;
}

std::vector<std::int64_t> adj_apply(const std::vector<std::vector<std::int64_t>>& adj,
                                    const IVec& x) {
  const int p = static_cast<int>(x.size());
  std::vector<std::int64_t> y(p, 0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) y[i] += adj[i][j] * x[j];
  return y;
}

// Exact path formula for a coefficient: walking from rep to x along the
// lattice rows, each step along row nu multiplies by
// (-1)^{n_nu} E(tau (x_nu + 1 - delta_{nu,1})), so the result is
// sigma E(tau S) with sigma = +-1 and S an exact integer.
struct PathValue {
  int sigma = 1;
  std::int64_t S = 0;
};

PathValue path_value(const CFrac& c, const std::vector<IVec>& rows, const IVec& rep,
                     const std::vector<std::int64_t>& steps) {
  const int p = c.length();
  PathValue pv;
  IVec cur = rep;
  for (int nu = 0; nu < p; ++nu) {
    const bool odd = c.terms[nu] % 2 != 0;
    const std::int64_t m = steps[nu];
    for (std::int64_t s = 0; s < std::llabs(m); ++s) {
      if (m > 0) {
        pv.S += cur[nu] + 1 - (nu == 0 ? 1 : 0);
        for (int j = 0; j < p; ++j) cur[j] += rows[nu][j];
      } else {
        for (int j = 0; j < p; ++j) cur[j] -= rows[nu][j];
        pv.S -= cur[nu] + 1 - (nu == 0 ? 1 : 0);
      }
      if (odd) pv.sigma = -pv.sigma;
    }
  }
  return pv;
}

}  // namespace

IVec MultiThetaSpace::label(const IVec& x) const {
  auto y = adj_apply(adj, x);
  IVec out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = static_cast<int>(mod_n(y[i], n()));
  return out;
}

MultiThetaSpace build_space(const CFrac& c, const Lattice& l, int B, double tol,
                            double im_z_max) {
  MultiThetaSpace sp{c, l};
  const int p = c.length();
  const long n = c.n;
  if (B == 0) {
    // The quadratic decay is weakest along the soft direction of the
    // tridiagonal form (alternating signs, e.g. runs of 2s), which gets
    // softer with the length of the expansion.
    std::int64_t mx = 0;
    for (std::int64_t t : c.terms) mx = std::max(mx, t);
    B = static_cast<int>((6 + 4 * p) * mx);
  }
  if (B < 2) throw InvalidInput("build_space: box radius too small");
  sp.box_radius = B;
  sp.tol = tol;
  const double im_tau = l.tau.imag();
  sp.im_z_max = im_z_max > 0.0 ? im_z_max : 2.6 * im_tau;

  double npoints = std::pow(2.0 * B + 1.0, p);
  if (npoints > 2e7) throw InvalidInput("build_space: index box too large");

  sp.adj = adjugate(c);
  const auto rows = lattice_rows(c);

  // BFS from the origin along unit steps to pick one representative per
  // coset, in a deterministic discovery order (the origin's coset first);
  // representatives stay as close to 0 as possible.
  std::map<IVec, int> label_to_index;
  std::map<IVec, bool> visited;
  std::deque<IVec> queue;
  IVec origin(p, 0);
  queue.push_back(origin);
  visited[origin] = true;
  while (!queue.empty() && static_cast<long>(sp.coset_reps.size()) < n) {
    IVec x = queue.front();
    queue.pop_front();
    IVec lab = sp.label(x);
    if (!label_to_index.count(lab)) {
      label_to_index[lab] = static_cast<int>(sp.coset_reps.size());
      sp.coset_reps.push_back(x);
    }
    for (int j = 0; j < p; ++j)
      for (int dir : {1, -1}) {
        IVec y = x;
        y[j] += dir;
        if (std::abs(y[j]) > B) continue;
        if (!visited[y]) {
          visited[y] = true;
          queue.push_back(y);
        }
      }
  }
  if (static_cast<long>(sp.coset_reps.size()) != n)
    throw InternalError("build_space: BFS did not reach all cosets");

  // Exact sign/exponent per box point, grouped by coset.
  struct Raw {
    IVec x;
    int sigma;
    std::int64_t S;
    bool boundary;
  };
  std::vector<std::vector<Raw>> raw(n);

  IVec x(p, -B);
  for (;;) {
    IVec lab = sp.label(x);
    int ci = label_to_index.at(lab);
    const IVec& rep = sp.coset_reps[ci];
    IVec diff(p);
    for (int j = 0; j < p; ++j) diff[j] = x[j] - rep[j];
    auto adjd = adj_apply(sp.adj, diff);
    std::vector<std::int64_t> steps(p);
    for (int j = 0; j < p; ++j) {
      if (adjd[j] % n != 0) throw InternalError("build_space: coset label inconsistency");
      steps[j] = adjd[j] / n;
    }
    PathValue pv = path_value(c, rows, rep, steps);
    bool boundary = false;
    for (int j = 0; j < p; ++j)
      if (std::abs(x[j]) == B) boundary = true;
    raw[ci].push_back({x, pv.sigma, pv.S, boundary});

    int j = p - 1;
    while (j >= 0 && x[j] == B) x[j--] = -B;
    if (j < 0) break;
    ++x[j];
  }

  const double two_pi_im = two_pi * im_tau;
  sp.tables.resize(n);
  for (long ci = 0; ci < n; ++ci) {
    double max_log = -1e300;
    for (const Raw& r : raw[ci])
      max_log = std::max(max_log, -two_pi_im * static_cast<double>(r.S));
    for (const Raw& r : raw[ci]) {
      double log_a = -two_pi_im * static_cast<double>(r.S);
      if (log_a > 700.0) throw InternalError("build_space: coefficient overflow");
      std::int64_t l1 = 0;
      for (int j = 0; j < p; ++j) l1 += std::abs(r.x[j]);
      double log_w = log_a + two_pi * sp.im_z_max * static_cast<double>(l1);
      if (r.boundary && log_w - max_log > std::log(tol))
        throw BoxTooSmall("build_space: coefficients not decayed at box boundary");
      if (log_w - max_log < std::log(1e-26)) continue;  // negligible for |Im z| <= im_z_max
      cplx val = static_cast<double>(r.sigma) * E(l.tau * static_cast<double>(r.S));
      sp.tables[ci].push_back({r.x, val});
    }
    // Box sweep order is already lexicographic; keep the invariant explicit.
    std::sort(sp.tables[ci].begin(), sp.tables[ci].end(),
              [](const FourierCoeff& a, const FourierCoeff& b) {
                return index_less(a.index, b.index);
              });
  }
  return sp;
}

cplx evaluate_table(const CoeffTable& table, std::span<const cplx> z) {
  cplx sum = 0.0;
  for (const FourierCoeff& fc : table) {
    cplx phase = 0.0;
    for (size_t j = 0; j < z.size(); ++j)
      phase += static_cast<double>(fc.index[j]) * z[j];
    sum += fc.value * E(phase);
  }
  return sum;
}

cplx MultiThetaSpace::evaluate(int table_index, std::span<const cplx> z) const {
  if (table_index < 0 || table_index >= static_cast<int>(tables.size()))
    throw InvalidInput("evaluate: bad table index");
  if (static_cast<int>(z.size()) != p()) throw InvalidInput("evaluate: bad arity");
  return evaluate_table(tables[table_index], z);
}

std::int64_t t1_phase(const MultiThetaSpace& space, int table_index) {
  auto t = trailing_dets(space.cfrac);
  const IVec& rep = space.coset_reps.at(table_index);
  std::int64_t acc = 0;
  for (int j = 0; j < space.p(); ++j) acc += t[j] * rep[j];
  return mod_n(acc, space.n());
}

namespace {

// Fourier side of T_{tau/n}: a coefficient at x moves to x + e_1 and picks
// up E(tau (x . r) + phi), r_j = d(n_{j+1}..n_p)/n.
CoeffTable apply_t_tau(const CoeffTable& in, const std::vector<double>& r, cplx tau,
                       cplx phi) {
  CoeffTable out;
  out.reserve(in.size());
  for (const FourierCoeff& fc : in) {
    double xr = 0.0;
    for (size_t j = 0; j < r.size(); ++j) xr += static_cast<double>(fc.index[j]) * r[j];
    IVec y = fc.index;
    ++y[0];
    out.push_back({std::move(y), fc.value * E(tau * xr + phi)});
  }
  return out;
}

const cplx* table_find(const CoeffTable& t, const IVec& idx) {
  auto it = std::lower_bound(t.begin(), t.end(), idx,
                             [](const FourierCoeff& a, const IVec& b) {
                               return index_less(a.index, b);
                             });
  if (it == t.end() || it->index != idx) return nullptr;
  return &it->value;
}

}  // namespace

WBasis build_w_basis(const MultiThetaSpace& space) {
  const long n = space.n();
  WBasis wb{space.cfrac, space.lattice, cplx(0.0), {}, {}};
  auto t = trailing_dets(space.cfrac);
  for (int j = 0; j < space.p(); ++j)
    wb.shift.push_back(static_cast<double>(t[j]) / static_cast<double>(n));

  // w_0 is the coset fixed by T_{1/n}; the BFS starts at the origin, whose
  // coset has phase 0, so it is table 0 -- but check rather than assume.
  int w0_index = -1;
  for (int i = 0; i < static_cast<int>(space.tables.size()); ++i)
    if (t1_phase(space, i) == 0) {
      w0_index = i;
      break;
    }
  if (w0_index < 0) throw InternalError("build_w_basis: no phase-0 coset");
  const CoeffTable& w0 = space.tables[w0_index];
  if (w0.empty()) throw InternalError("build_w_basis: empty seed table");

  // Fix phi so that T_{tau/n}^n = 1 on w_0: apply n times with phi = 0,
  // read off the scalar against the original table, take the principal root.
  CoeffTable probe = w0;
  for (long a = 0; a < n; ++a) probe = apply_t_tau(probe, wb.shift, space.lattice.tau, 0.0);

  double max_abs = 0.0;
  for (const FourierCoeff& fc : w0) max_abs = std::max(max_abs, std::abs(fc.value));
  cplx s0 = 0.0;
  bool have = false;
  for (const FourierCoeff& fc : probe) {
    const cplx* orig = table_find(w0, fc.index);
    if (!orig || std::abs(*orig) < 1e-8 * max_abs) continue;
    cplx ratio = fc.value / *orig;
    if (!have) {
      s0 = ratio;
      have = true;
    } else if (std::abs(ratio - s0) > 1e-6 * std::abs(s0)) {
      throw InternalError("build_w_basis: T^n is not scalar on w_0");
    }
  }
  if (!have) throw InternalError("build_w_basis: no overlap for the T^n scalar");
  wb.phi = -std::log(s0) / (cplx(0.0, two_pi) * static_cast<double>(n));

  wb.w.resize(n);
  wb.w[0] = w0;
  for (long a = 1; a < n; ++a)
    wb.w[a] = apply_t_tau(wb.w[a - 1], wb.shift, space.lattice.tau, wb.phi);
  return wb;
}

cplx WBasis::eval(long alpha, std::span<const cplx> z) const {
  if (static_cast<int>(z.size()) != p()) throw InvalidInput("WBasis::eval: bad arity");
  return evaluate_table(w[mod_n(alpha, n())], z);
}

}  // namespace ellex
