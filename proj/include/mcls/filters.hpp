#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "mcls/image.hpp"

namespace mcls {

/// Partial derivatives along rows (r) and columns (c).
template <typename Scalar>
struct Gradient {
  Plane<Scalar> dr;
  Plane<Scalar> dc;
};

namespace detail {

// Whole-sample symmetric reflection: index -1 maps to 0, n maps to n-1.
inline Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace detail

/// d/dr of a plane: central differences inside, one-sided on the border rows.
template <typename Derived>
Plane<typename Derived::Scalar> diff_rows(const Eigen::ArrayBase<Derived>& f) {
  using Scalar = typename Derived::Scalar;
  const Plane<Scalar> in = f;
  const Eigen::Index rows = in.rows(), cols = in.cols();
  Plane<Scalar> out(rows, cols);
  if (rows < 2) {
    out.setZero();
    return out;
  }
  out.row(0) = in.row(1) - in.row(0);
  out.row(rows - 1) = in.row(rows - 1) - in.row(rows - 2);
  if (rows > 2) {
    out.middleRows(1, rows - 2) =
        (in.bottomRows(rows - 2) - in.topRows(rows - 2)) / Scalar(2);
  }
  return out;
}

/// d/dc of a plane: central differences inside, one-sided on the border columns.
template <typename Derived>
Plane<typename Derived::Scalar> diff_cols(const Eigen::ArrayBase<Derived>& f) {
  using Scalar = typename Derived::Scalar;
  const Plane<Scalar> in = f;
  const Eigen::Index rows = in.rows(), cols = in.cols();
  Plane<Scalar> out(rows, cols);
  if (cols < 2) {
    out.setZero();
    return out;
  }
  out.col(0) = in.col(1) - in.col(0);
  out.col(cols - 1) = in.col(cols - 1) - in.col(cols - 2);
  if (cols > 2) {
    out.middleCols(1, cols - 2) =
        (in.rightCols(cols - 2) - in.leftCols(cols - 2)) / Scalar(2);
  }
  return out;
}

template <typename Derived>
Gradient<typename Derived::Scalar> gradient(const Eigen::ArrayBase<Derived>& f) {
  return {diff_rows(f), diff_cols(f)};
}

/// div(v) = d(v_r)/dr + d(v_c)/dc with the same stencil as gradient().
template <typename Scalar>
Plane<Scalar> divergence(const Plane<Scalar>& vr, const Plane<Scalar>& vc) {
  return diff_rows(vr) + diff_cols(vc);
}

/// div(grad f) built from the same central-difference operator.
template <typename Derived>
Plane<typename Derived::Scalar> laplacian(const Eigen::ArrayBase<Derived>& f) {
  const auto g = gradient(f);
  return divergence(g.dr, g.dc);
}

/// Normalized 1D Gaussian taps on [-radius, radius], radius = ceil(4 sigma).
template <typename Scalar>
std::vector<Scalar> gaussian_kernel(Scalar sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * static_cast<double>(sigma)));
  std::vector<Scalar> taps(static_cast<std::size_t>(2 * radius + 1));
  Scalar sum = 0;
  for (int k = -radius; k <= radius; ++k) {
    const Scalar w = std::exp(-Scalar(k * k) / (Scalar(2) * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (auto& w : taps) w /= sum;
  return taps;
}

/// Separable Gaussian convolution with symmetric (reflecting) borders.
/// sigma == 0 returns the input unchanged.
template <typename Derived>
Plane<typename Derived::Scalar> gaussian_blur(const Eigen::ArrayBase<Derived>& f,
                                              typename Derived::Scalar sigma) {
  using Scalar = typename Derived::Scalar;
  Plane<Scalar> in = f;
  if (sigma < Scalar(0)) {
    throw Error(ErrorCode::InvalidArgument, "gaussian_blur: sigma must be non-negative");
  }
  if (sigma == Scalar(0)) return in;
  const std::vector<Scalar> taps = gaussian_kernel(sigma);
  const Eigen::Index radius = static_cast<Eigen::Index>(taps.size() / 2);
  const Eigen::Index rows = in.rows(), cols = in.cols();

  Plane<Scalar> tmp(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Scalar acc = 0;
      for (Eigen::Index k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] * in(r, detail::reflect(c + k, cols));
      }
      tmp(r, c) = acc;
    }
  }
  Plane<Scalar> out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Scalar acc = 0;
      for (Eigen::Index k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] * tmp(detail::reflect(r + k, rows), c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace mcls
