#pragma once

#include <span>
#include <vector>

#include "mcls/error.hpp"

namespace mcls {

/// Thomas algorithm for a tridiagonal system.
///
/// `lower[i]` couples row i to unknown i-1 (lower[0] unused), `upper[i]`
/// couples row i to unknown i+1 (upper[n-1] unused). The solution overwrites
/// `rhs`. Requires a system that needs no pivoting, which holds for the
/// diagonally dominant matrices produced by semi-implicit diffusion.
template <typename Scalar>
void solve_tridiagonal(std::span<const Scalar> lower, std::span<const Scalar> diag,
                       std::span<const Scalar> upper, std::span<Scalar> rhs,
                       std::vector<Scalar>& scratch) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw Error(ErrorCode::Dimension, "solve_tridiagonal: band lengths differ");
  }
  if (n == 0) return;
  scratch.resize(n);
  Scalar denom = diag[0];
  if (denom == Scalar(0)) throw Error(ErrorCode::Divergence, "solve_tridiagonal: zero pivot");
  scratch[0] = n > 1 ? upper[0] / denom : Scalar(0);
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * scratch[i - 1];
    if (denom == Scalar(0)) throw Error(ErrorCode::Divergence, "solve_tridiagonal: zero pivot");
    scratch[i] = i + 1 < n ? upper[i] / denom : Scalar(0);
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] -= scratch[i] * rhs[i + 1];
  }
}

}  // namespace mcls
