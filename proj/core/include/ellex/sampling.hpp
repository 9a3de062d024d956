#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ellex/complexutil.hpp"
#include "ellex/errors.hpp"

namespace ellex {

/// Deterministic sample-point source. Doubles are produced from the raw
/// 64-bit stream (top 53 bits) so the sequence is bit-identical across
/// platforms and library versions.
struct Sampler {
  std::mt19937_64 gen;

  explicit Sampler(std::uint64_t seed) : gen(seed) {}

  double uniform() { return static_cast<double>(gen() >> 11) * 0x1p-53; }

  /// Uniform point of the fundamental cell {a + b tau : a,b in [0,1)}.
  cplx cell(cplx tau) { return uniform() + uniform() * tau; }

  std::vector<cplx> cell_vec(int p, cplx tau) {
    std::vector<cplx> z(p);
    for (auto& zj : z) zj = cell(tau);
    return z;
  }
};

/// Rejection sampling with a cap: draw until `accept` passes or the budget
/// runs out.
template <typename Draw, typename Accept>
auto sample_guarded(Draw&& draw, Accept&& accept, int max_tries = 200) {
  for (int i = 0; i < max_tries; ++i) {
    auto x = draw();
    if (accept(x)) return x;
  }
  throw SamplingExhausted("sample_guarded: no admissible point found");
}

}  // namespace ellex
