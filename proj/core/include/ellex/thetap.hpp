#pragma once

#include <span>
#include <vector>

#include "ellex/cfrac.hpp"
#include "ellex/theta.hpp"

namespace ellex {

using IVec = std::vector<int>;

struct FourierCoeff {
  IVec index;
  cplx value;
};
using CoeffTable = std::vector<FourierCoeff>;  // sorted lexicographically by index

/// The n-dimensional space of p-variable theta functions attached to the
/// continued fraction of n/k. Functions are 1-periodic in each variable, so
/// each is a Fourier series; tau-quasi-periodicity turns the coefficients
/// into one orbit per coset of the sublattice spanned by the tridiagonal
/// rows v_nu = n_nu e_nu - e_{nu-1} - e_{nu+1}.
struct MultiThetaSpace {
  CFrac cfrac;
  Lattice lattice;
  int box_radius = 0;
  double im_z_max = 0.0;  // |Im z_j| bound assumed when pruning / checking decay
  double tol = 1e-10;

  std::vector<std::vector<std::int64_t>> adj;  // adjugate of the row matrix
  std::vector<IVec> coset_reps;                // n of them, BFS order from 0
  std::vector<CoeffTable> tables;              // one per coset, seed value 1 at rep

  int p() const { return cfrac.length(); }
  long n() const { return cfrac.n; }

  /// Coset label of an integer point: (adj . x) mod n componentwise.
  IVec label(const IVec& x) const;

  cplx evaluate(int table_index, std::span<const cplx> z) const;
};

/// Builds the n coefficient tables over the index box [-B,B]^p. B = 0 picks
/// the default 8 * max(n_nu). Throws BoxTooSmall if the (decay-weighted)
/// boundary coefficients are not below tol relative to the peak.
MultiThetaSpace build_space(const CFrac& c, const Lattice& l, int B = 0,
                            double tol = 1e-10, double im_z_max = 0.0);

cplx evaluate_table(const CoeffTable& table, std::span<const cplx> z);

/// Integer rho with T_{1/n} (coset i) = E(rho / n) (coset i): the value of
/// x . (d(n_2..n_p), d(n_3..n_p), ..., 1) mod n, constant on the coset.
std::int64_t t1_phase(const MultiThetaSpace& space, int table_index);

/// Canonical basis {w_alpha}: w_0 is the coset function with T_{1/n}
/// eigenvalue 1, w_{alpha+1} = T_{tau/n} w_alpha via the Fourier-side index
/// shift, with the constant phi fixed so that T_{tau/n}^n = 1.
struct WBasis {
  CFrac cfrac;
  Lattice lattice;
  cplx phi;
  std::vector<double> shift;    // r_j = d(n_{j+1},...,n_p)/n, the T_{1/n} shift
  std::vector<CoeffTable> w;    // w[alpha], alpha = 0..n-1

  long n() const { return cfrac.n; }
  int p() const { return cfrac.length(); }
  cplx eval(long alpha, std::span<const cplx> z) const;
};

WBasis build_w_basis(const MultiThetaSpace& space);

}  // namespace ellex
