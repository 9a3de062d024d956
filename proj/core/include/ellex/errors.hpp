#pragma once

#include <stdexcept>
#include <string>

namespace ellex {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user-supplied parameters (non-coprime (n,k), Im tau <= 0, ...).
struct InvalidInput : Error {
  using Error::Error;
};

/// A truncated series did not reach the requested tolerance.
struct TruncationError : Error {
  using Error::Error;
};

/// A theta denominator came too close to one of its zeros.
struct PoleProximity : Error {
  using Error::Error;
};

/// Fourier box too small to reach the coefficient-decay threshold.
struct BoxTooSmall : Error {
  using Error::Error;
};

/// Rejection sampling failed to find enough pole-guarded points.
struct SamplingExhausted : Error {
  using Error::Error;
};

/// A limit sequence failed to settle (degenerate-eta checks).
struct LimitNotConverged : Error {
  using Error::Error;
};

/// An internal invariant failed; indicates a bug, not bad input.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace ellex
