#pragma once

#include <algorithm>

#include "mcls/image.hpp"

namespace mcls {

/// CT display window in Hounsfield units.
struct HuWindow {
  double level = 50.0;
  double width = 250.0;

  double lower() const { return level - width / 2.0; }
  double upper() const { return level + width / 2.0; }
};

/// Clamps raw HU values to the window and maps them affinely onto [0, 255].
template <typename Derived>
GrayImage<typename Derived::Scalar> window_hu(const Eigen::ArrayBase<Derived>& raw,
                                              const HuWindow& window) {
  using Scalar = typename Derived::Scalar;
  if (!(window.width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "window_hu: window width must be positive");
  }
  if (!raw.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "window_hu: raw intensities must be finite");
  }
  const Scalar lo = static_cast<Scalar>(window.lower());
  const Scalar hi = static_cast<Scalar>(window.upper());
  const Scalar gain = Scalar(255) / (hi - lo);
  return ((raw.derived().max(lo).min(hi) - lo) * gain).eval();
}

}  // namespace mcls
