#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "mcls/error.hpp"

namespace mcls {

/// A scalar raster. Rows index r (vertical), columns index c (horizontal);
/// storage is row-major so that the flat layout matches the file formats.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale slice, display-normalized to [0, 255].
template <typename Scalar = double>
using GrayImage = Plane<Scalar>;

/// Per-pixel foreground probability in [0, 1].
template <typename Scalar = double>
using ProbMap = Plane<Scalar>;

/// Level-set function; positive inside the contour.
template <typename Scalar = double>
using LevelSetField = Plane<Scalar>;

/// Binary segmentation, values exactly 0 or 1.
using BinaryMask = Plane<std::uint8_t>;

template <typename A, typename B>
bool same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

template <typename A, typename B>
void require_same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b,
                        const char* what) {
  if (!same_shape(a, b)) {
    throw Error(ErrorCode::Dimension,
                std::string(what) + ": dimension mismatch (" + std::to_string(a.cols()) +
                    "x" + std::to_string(a.rows()) + " vs " + std::to_string(b.cols()) +
                    "x" + std::to_string(b.rows()) + ")");
  }
}

/// Stencil operations need interior points in both directions.
template <typename Derived>
void require_min_size(const Eigen::ArrayBase<Derived>& a, const char* what) {
  if (a.rows() < 3 || a.cols() < 3) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + ": raster must be at least 3x3");
  }
}

template <typename Scalar>
void validate_gray(const GrayImage<Scalar>& image) {
  require_min_size(image, "gray image");
  if (!image.allFinite() || (image < Scalar(0)).any() || (image > Scalar(255)).any()) {
    throw Error(ErrorCode::InvalidArgument, "gray image: values must be finite and in [0, 255]");
  }
}

template <typename Scalar>
void validate_prob(const ProbMap<Scalar>& map) {
  if (!map.allFinite() || (map < Scalar(0)).any() || (map > Scalar(1)).any()) {
    throw Error(ErrorCode::InvalidArgument, "probability map: values must be finite and in [0, 1]");
  }
}

inline void validate_mask(const BinaryMask& mask) {
  if ((mask > std::uint8_t(1)).any()) {
    throw Error(ErrorCode::InvalidArgument, "binary mask: values must be 0 or 1");
  }
}

template <typename Scalar>
Plane<Scalar> mask_to_plane(const BinaryMask& mask) {
  return mask.cast<Scalar>();
}

/// {v > threshold} as a mask.
template <typename Derived>
BinaryMask threshold_mask(const Eigen::ArrayBase<Derived>& values,
                          typename Derived::Scalar threshold) {
  return (values > threshold).template cast<std::uint8_t>();
}

}  // namespace mcls
