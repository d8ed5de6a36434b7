#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mcls/filters.hpp"
#include "mcls/image.hpp"
#include "mcls/tridiagonal.hpp"

namespace mcls {

/// Per-pixel symmetric 2x2 tensor stored as (t_rr, t_cc, 2 t_rc).
///
/// The third plane holds the doubled cross term, as in the initialization
/// (I_r^2, I_c^2, 2 I_r I_c); the matrix off-diagonal is half of it.
template <typename Scalar>
struct TensorField {
  Plane<Scalar> rr;
  Plane<Scalar> cc;
  Plane<Scalar> rc2;

  Eigen::Index rows() const { return rr.rows(); }
  Eigen::Index cols() const { return rr.cols(); }

  std::array<Plane<Scalar>*, 3> channels() { return {&rr, &cc, &rc2}; }
  std::array<const Plane<Scalar>*, 3> channels() const { return {&rr, &cc, &rc2}; }
};

template <typename Scalar = double>
struct DiffusionParams {
  Scalar tau = Scalar(0.01);      // singularity guard
  Scalar p = Scalar(1.6);         // diffusivity exponent, in (0, 2]
  Scalar step_size = Scalar(5.0); // AOS time step
  int steps = 5;
  // Multiplier applied to the [0, 255] gray image before the tensor is formed.
  Scalar intensity_scale = Scalar(1.0);

  void validate() const {
    if (!(tau > 0) || !(p > 0 && p <= 2) || !(step_size > 0) || steps < 0 ||
        !(intensity_scale > 0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "diffusion parameters: need tau > 0, p in (0, 2], step size > 0, steps >= 0, "
                  "intensity scale > 0");
    }
  }
};

/// Image gradients (I_r, I_c).
template <typename Scalar>
Gradient<Scalar> gradients(const GrayImage<Scalar>& image) {
  require_min_size(image, "gradients");
  return gradient(image);
}

/// Initial (linear, unsmoothed) structure tensor (I_r^2, I_c^2, 2 I_r I_c).
template <typename Scalar>
TensorField<Scalar> structure_tensor_init(const GrayImage<Scalar>& image) {
  const Gradient<Scalar> g = gradients(image);
  return {g.dr.square(), g.dc.square(), Scalar(2) * g.dr * g.dc};
}

/// g(s) = 1 / (s + tau^2)^(p/2), where s is a squared gradient magnitude.
template <typename Scalar>
Scalar diffusivity(Scalar grad_sq_sum, const DiffusionParams<Scalar>& params) {
  return Scalar(1) / std::pow(grad_sq_sum + params.tau * params.tau, params.p / Scalar(2));
}

namespace detail {

// Solves (I - t A) x = b along one line, where A is the 1D Neumann diffusion
// operator with half-point diffusivities (g_i + g_{i+1}) / 2.
template <typename Scalar>
struct LineSolver {
  std::vector<Scalar> lower, diag, upper, rhs, scratch;

  void solve(const Scalar* g, const Scalar* b, Scalar* x, Eigen::Index stride, Eigen::Index n,
             Scalar t) {
    const auto un = static_cast<std::size_t>(n);
    lower.assign(un, Scalar(0));
    upper.assign(un, Scalar(0));
    diag.assign(un, Scalar(1));
    rhs.resize(un);
    for (Eigen::Index i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] = b[i * stride];
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const Scalar w = t * (g[i * stride] + g[(i + 1) * stride]) / Scalar(2);
      const auto ui = static_cast<std::size_t>(i);
      diag[ui] += w;
      diag[ui + 1] += w;
      upper[ui] = -w;
      lower[ui + 1] = -w;
    }
    solve_tridiagonal<Scalar>(lower, diag, upper, rhs, scratch);
    for (Eigen::Index i = 0; i < n; ++i) x[i * stride] = rhs[static_cast<std::size_t>(i)];
  }
};

}  // namespace detail

/// One additive-operator-splitting step for du/dt = div(g grad u) on a single
/// plane with a precomputed diffusivity field: the average of the two
/// semi-implicit 1D solves (I - 2 dt A_l)^{-1} u, l in {rows, cols}.
template <typename Scalar>
Plane<Scalar> aos_step(const Plane<Scalar>& u, const Plane<Scalar>& g, Scalar dt) {
  require_same_shape(u, g, "aos_step");
  const Eigen::Index rows = u.rows(), cols = u.cols();
  Plane<Scalar> along_r(rows, cols), along_c(rows, cols);
  detail::LineSolver<Scalar> solver;
  const Scalar t = Scalar(2) * dt;
  for (Eigen::Index c = 0; c < cols; ++c) {
    solver.solve(g.data() + c, u.data() + c, along_r.data() + c, cols, rows, t);
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    solver.solve(g.data() + r * cols, u.data() + r * cols, along_c.data() + r * cols, 1, cols, t);
  }
  return (along_r + along_c) / Scalar(2);
}

/// Squared gradient magnitude summed over the three tensor channels.
template <typename Scalar>
Plane<Scalar> joint_gradient_sq(const TensorField<Scalar>& field) {
  Plane<Scalar> sum = Plane<Scalar>::Zero(field.rows(), field.cols());
  for (const Plane<Scalar>* ch : field.channels()) {
    const Gradient<Scalar> g = gradient(*ch);
    sum += g.dr.square() + g.dc.square();
  }
  return sum;
}

/// Nonlinear diffusion of the tensor field with one diffusivity shared by all
/// channels, integrated with `params.steps` AOS steps.
template <typename Scalar>
TensorField<Scalar> aos_diffuse(TensorField<Scalar> field, const DiffusionParams<Scalar>& params) {
  params.validate();
  for (int step = 0; step < params.steps; ++step) {
    const Plane<Scalar> grad_sq = joint_gradient_sq(field);
    const Plane<Scalar> g = grad_sq.unaryExpr([&](Scalar s) { return diffusivity(s, params); });
    for (Plane<Scalar>* ch : field.channels()) {
      *ch = aos_step(*ch, g, params.step_size);
      if (!ch->allFinite()) {
        throw Error(ErrorCode::Divergence,
                    "aos_diffuse: non-finite value after step " + std::to_string(step + 1));
      }
    }
  }
  return field;
}

/// Matrix square root of the per-pixel tensor: entries (s11, s22, s12) of
/// T diag(sqrt(lambda)) T^T.
template <typename Scalar>
struct TensorRoot {
  Plane<Scalar> s11;
  Plane<Scalar> s22;
  Plane<Scalar> s12;
};

/// Square root of one symmetric 2x2 matrix [[a, b], [b, d]]. Eigenvalues above
/// -psd_eps are clamped to zero; anything lower returns false.
template <typename Scalar>
bool sqrt_sym2(Scalar a, Scalar b, Scalar d, Scalar psd_eps, Scalar& s11, Scalar& s22,
               Scalar& s12) {
  using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
  Mat2 m;
  m << a, b, b, d;
  Eigen::SelfAdjointEigenSolver<Mat2> eig;
  eig.computeDirect(m);
  Eigen::Matrix<Scalar, 2, 1> lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -psd_eps) return false;
  lambda = lambda.cwiseMax(Scalar(0)).cwiseSqrt();
  const Mat2 root = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  s11 = root(0, 0);
  s22 = root(1, 1);
  s12 = Scalar(0.5) * (root(0, 1) + root(1, 0));
  return true;
}

/// Per-pixel tensor square root. Throws a Divergence error if an eigenvalue
/// is below -1e-6 * (largest channel magnitude).
template <typename Scalar>
TensorRoot<Scalar> tensor_sqrt(const TensorField<Scalar>& field) {
  require_same_shape(field.rr, field.cc, "tensor_sqrt");
  require_same_shape(field.rr, field.rc2, "tensor_sqrt");
  const Scalar scale = std::max({field.rr.abs().maxCoeff(), field.cc.abs().maxCoeff(),
                                 field.rc2.abs().maxCoeff()});
  const Scalar psd_eps = Scalar(1e-6) * scale;
  TensorRoot<Scalar> out{Plane<Scalar>(field.rows(), field.cols()),
                         Plane<Scalar>(field.rows(), field.cols()),
                         Plane<Scalar>(field.rows(), field.cols())};
  for (Eigen::Index i = 0; i < field.rr.size(); ++i) {
    if (!sqrt_sym2(field.rr.data()[i], field.rc2.data()[i] / Scalar(2), field.cc.data()[i],
                   psd_eps, out.s11.data()[i], out.s22.data()[i], out.s12.data()[i])) {
      throw Error(ErrorCode::Divergence,
                  "tensor_sqrt: tensor not positive semidefinite at pixel (" +
                      std::to_string(i / field.cols()) + ", " + std::to_string(i % field.cols()) +
                      ")");
    }
  }
  return out;
}

inline constexpr int kFeatureChannels = 5;

/// Cue channels (gray, 2 s11, 2 s22, 4 s12, prior), each min-max normalized to [0, 255].
template <typename Scalar>
struct FeatureStack {
  std::array<Plane<Scalar>, kFeatureChannels> channels;

  Eigen::Index rows() const { return channels[0].rows(); }
  Eigen::Index cols() const { return channels[0].cols(); }
  const Plane<Scalar>& operator[](int j) const { return channels[static_cast<std::size_t>(j)]; }
  Plane<Scalar>& operator[](int j) { return channels[static_cast<std::size_t>(j)]; }
};

/// Affine map of a plane onto [0, 255]; a constant plane maps to zeros.
template <typename Scalar>
Plane<Scalar> minmax_normalize(const Plane<Scalar>& x) {
  const Scalar lo = x.minCoeff();
  const Scalar hi = x.maxCoeff();
  if (!(hi > lo)) return Plane<Scalar>::Zero(x.rows(), x.cols());
  return ((x - lo) * (Scalar(255) / (hi - lo))).min(Scalar(255)).max(Scalar(0));
}

template <typename Scalar>
FeatureStack<Scalar> assemble_features(const GrayImage<Scalar>& image, const TensorRoot<Scalar>& root,
                                       const ProbMap<Scalar>& prior) {
  require_same_shape(image, root.s11, "assemble_features");
  require_same_shape(image, root.s22, "assemble_features");
  require_same_shape(image, root.s12, "assemble_features");
  require_same_shape(image, prior, "assemble_features");
  FeatureStack<Scalar> f;
  f[0] = minmax_normalize<Scalar>(image);
  f[1] = minmax_normalize<Scalar>(Scalar(2) * root.s11);
  f[2] = minmax_normalize<Scalar>(Scalar(2) * root.s22);
  f[3] = minmax_normalize<Scalar>(Scalar(4) * root.s12);
  f[4] = minmax_normalize<Scalar>(prior);
  return f;
}

/// Full texture pipeline: tensor initialization, nonlinear diffusion, square
/// root, and assembly with the gray and prior cues.
template <typename Scalar>
FeatureStack<Scalar> build_features(const GrayImage<Scalar>& image, const ProbMap<Scalar>& prior,
                                    const DiffusionParams<Scalar>& params) {
  params.validate();
  require_same_shape(image, prior, "build_features");
  const GrayImage<Scalar> scaled = image * params.intensity_scale;
  const TensorField<Scalar> diffused = aos_diffuse(structure_tensor_init(scaled), params);
  return assemble_features(image, tensor_sqrt(diffused), prior);
}

}  // namespace mcls
