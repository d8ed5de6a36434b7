#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mcls/filters.hpp"
#include "mcls/image.hpp"
#include "mcls/texture.hpp"

namespace mcls {

template <typename Scalar>
Scalar heaviside(Scalar v, Scalar tau) {
  return Scalar(0.5) * (Scalar(1) + Scalar(2) / std::numbers::pi_v<Scalar> * std::atan(v / tau));
}

/// Derivative of heaviside(): tau / (pi (v^2 + tau^2)).
template <typename Scalar>
Scalar dirac(Scalar v, Scalar tau) {
  return tau / (std::numbers::pi_v<Scalar> * (v * v + tau * tau));
}

template <typename Scalar>
Plane<Scalar> heaviside(const Plane<Scalar>& v, Scalar tau) {
  return v.unaryExpr([tau](Scalar x) { return heaviside(x, tau); });
}

template <typename Scalar>
Plane<Scalar> dirac(const Plane<Scalar>& v, Scalar tau) {
  return v.unaryExpr([tau](Scalar x) { return dirac(x, tau); });
}

template <typename Scalar = double>
struct LevelSetConfig {
  Scalar eta = Scalar(0.1);                     // time step
  Scalar nu = Scalar(0.01);                     // distance regularization weight
  Scalar mu = Scalar(0.001 * 255 * 255);        // length weight
  Scalar tau = Scalar(0.01);                    // Heaviside width
  std::array<Scalar, kFeatureChannels> omega{1, 1, 1, 1, 0.3};
  Scalar sigma_edge = Scalar(3.0);
  int steps = 1000;
  Scalar init_threshold = Scalar(0.5);
  Scalar init_amplitude = Scalar(2.0);
  std::array<bool, kFeatureChannels> channels{true, true, true, true, true};
  Scalar sigma_floor = Scalar(1e-2);
  int stats_refresh = 1;
  // 1 / (1 + |K * I|) instead of the gradient-based indicator.
  bool literal_edge_indicator = false;
  // An update larger than this aborts the evolution as diverged.
  Scalar divergence_limit = Scalar(1e3);

  void validate() const {
    const bool weights_ok =
        std::all_of(omega.begin(), omega.end(), [](Scalar w) { return w >= 0 && std::isfinite(w); });
    if (!(eta > 0) || !(nu >= 0) || !(mu >= 0) || !(tau > 0) || !weights_ok ||
        !(sigma_edge > 0) || steps < 1 || !(init_threshold >= 0 && init_threshold < 1) ||
        !(init_amplitude > 0) || !(sigma_floor > 0) || stats_refresh < 1 ||
        !(divergence_limit > 0)) {
      throw Error(ErrorCode::InvalidArgument, "level-set configuration out of range");
    }
  }
};

/// Gaussian parameters per region (row 0 inside, row 1 outside) and channel.
template <typename Scalar>
struct RegionStats {
  Eigen::Array<Scalar, 2, kFeatureChannels> mean;
  Eigen::Array<Scalar, 2, kFeatureChannels> sigma;
};

template <typename Scalar>
struct EvolutionDiagnostics {
  std::vector<Scalar> energy;      // before each update
  std::vector<Scalar> max_update;  // max |delta phi| of each update
  std::vector<long> area;          // foreground pixel count after each update
  int iterations = 0;
};

/// Edge indicator 1 / (1 + |grad(K_sigma * I)|): about 1 in flat regions,
/// small on edges. The literal variant uses |K_sigma * I| instead.
template <typename Scalar>
Plane<Scalar> edge_indicator(const GrayImage<Scalar>& image, Scalar sigma_edge,
                             bool literal = false) {
  if (!(sigma_edge > 0)) {
    throw Error(ErrorCode::InvalidArgument, "edge_indicator: sigma must be positive");
  }
  const Plane<Scalar> smoothed = gaussian_blur(image, sigma_edge);
  if (literal) return (Scalar(1) + smoothed.abs()).inverse();
  const Gradient<Scalar> g = gradient(smoothed);
  return (Scalar(1) + (g.dr.square() + g.dc.square()).sqrt()).inverse();
}

template <typename Scalar>
struct PhiInit {
  LevelSetField<Scalar> phi;
  bool empty_background = false;  // every pixel started inside
};

/// Binary-step initialization: +c where prior > beta, -c elsewhere.
template <typename Scalar>
PhiInit<Scalar> init_phi_from_prior(const ProbMap<Scalar>& prior, Scalar beta, Scalar c) {
  if (!(beta >= 0 && beta < 1) || !(c > 0)) {
    throw Error(ErrorCode::InvalidArgument,
                "init_phi_from_prior: need 0 <= threshold < 1 and amplitude > 0");
  }
  const auto inside = (prior > beta).eval();
  const Eigen::Index count = inside.count();
  if (count == 0) {
    throw Error(ErrorCode::Collapse,
                "init_phi_from_prior: no prior value exceeds the threshold; lower the threshold");
  }
  PhiInit<Scalar> out;
  out.phi = inside.select(Plane<Scalar>::Constant(prior.rows(), prior.cols(), c),
                          Plane<Scalar>::Constant(prior.rows(), prior.cols(), -c));
  out.empty_background = count == prior.size();
  return out;
}

/// Binary-step circle, used when no rough position is available.
template <typename Scalar>
LevelSetField<Scalar> init_phi_circle(Eigen::Index rows, Eigen::Index cols, Scalar center_r,
                                      Scalar center_c, Scalar radius, Scalar c) {
  if (!(radius > 0) || !(c > 0)) {
    throw Error(ErrorCode::InvalidArgument, "init_phi_circle: radius and amplitude must be positive");
  }
  if (center_r - radius < 0 || center_c - radius < 0 || center_r + radius > Scalar(rows - 1) ||
      center_c + radius > Scalar(cols - 1)) {
    throw Error(ErrorCode::InvalidArgument, "init_phi_circle: circle leaves the canvas");
  }
  LevelSetField<Scalar> phi(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Scalar dr = Scalar(r) - center_r, dc = Scalar(k) - center_c;
      phi(r, k) = dr * dr + dc * dc <= radius * radius ? c : -c;
    }
  }
  return phi;
}

/// Centered circle of radius min(rows, cols) / 4.
template <typename Scalar>
LevelSetField<Scalar> init_phi_center_circle(Eigen::Index rows, Eigen::Index cols, Scalar c) {
  return init_phi_circle<Scalar>(rows, cols, Scalar(rows - 1) / 2, Scalar(cols - 1) / 2,
                                 Scalar(std::min(rows, cols)) / 4, c);
}

/// Weighted Gaussian fit of every channel inside (H(phi)) and outside (1 - H(phi)).
template <typename Scalar>
RegionStats<Scalar> region_stats(const FeatureStack<Scalar>& features, const LevelSetField<Scalar>& phi,
                                 Scalar tau, Scalar sigma_floor) {
  require_same_shape(features[0], phi, "region_stats");
  const Plane<Scalar> inside = heaviside(phi, tau);
  const Plane<Scalar> outside = Scalar(1) - inside;
  const std::array<const Plane<Scalar>*, 2> weights{&inside, &outside};
  RegionStats<Scalar> stats;
  for (int i = 0; i < 2; ++i) {
    const Plane<Scalar>& w = *weights[static_cast<std::size_t>(i)];
    const Scalar mass = w.sum();
    if (!(mass >= Scalar(1e-9))) {
      throw Error(ErrorCode::Collapse, std::string("region_stats: ") +
                                           (i == 0 ? "inside" : "outside") +
                                           " region vanished (contour collapsed)");
    }
    for (int j = 0; j < kFeatureChannels; ++j) {
      const Plane<Scalar>& f = features[j];
      const Scalar m = (f * w).sum() / mass;
      const Scalar var = ((f - m).square() * w).sum() / mass;
      stats.mean(i, j) = m;
      stats.sigma(i, j) = std::max(std::sqrt(var), sigma_floor);
    }
  }
  return stats;
}

template <typename Scalar>
Scalar gaussian_log_density(Scalar x, Scalar mean, Scalar sigma) {
  const Scalar z = (x - mean) / sigma;
  return -std::log(sigma) - Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) -
         Scalar(0.5) * z * z;
}

inline constexpr double kLogRatioClamp = 50.0;

/// Sum over enabled channels of omega_j * clamp(log p_1j(F_j) - log p_2j(F_j), +-50).
template <typename Scalar>
Plane<Scalar> log_likelihood_ratio(const FeatureStack<Scalar>& features, const RegionStats<Scalar>& stats,
                                   const std::array<Scalar, kFeatureChannels>& omega,
                                   const std::array<bool, kFeatureChannels>& enabled) {
  Plane<Scalar> out = Plane<Scalar>::Zero(features.rows(), features.cols());
  const Scalar clamp = static_cast<Scalar>(kLogRatioClamp);
  for (int j = 0; j < kFeatureChannels; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (!enabled[uj]) continue;
    const Scalar m1 = stats.mean(0, j), s1 = stats.sigma(0, j);
    const Scalar m2 = stats.mean(1, j), s2 = stats.sigma(1, j);
    const Scalar log_ratio_sigma = std::log(s2 / s1);
    const Plane<Scalar> term =
        (log_ratio_sigma + (features[j] - m2).square() / (Scalar(2) * s2 * s2) -
         (features[j] - m1).square() / (Scalar(2) * s1 * s1))
            .max(-clamp)
            .min(clamp);
    out += omega[uj] * term;
  }
  return out;
}

/// Discrete energy
///   nu/2 sum (|grad phi| - 1)^2 + mu sum g |grad H(phi)| - sum_j omega_j sum_i log p_ij(F_j) X_i(phi).
///
/// The length integral of g delta(phi) |grad phi| is evaluated as g |grad H(phi)|,
/// which is the same quantity by the chain rule but stays well sampled when
/// tau is far below the pixel spacing.
template <typename Scalar>
Scalar energy(const LevelSetField<Scalar>& phi, const FeatureStack<Scalar>& features,
              const RegionStats<Scalar>& stats, const Plane<Scalar>& g_edge,
              const LevelSetConfig<Scalar>& config) {
  require_same_shape(phi, g_edge, "energy");
  require_same_shape(phi, features[0], "energy");
  const Gradient<Scalar> gp = gradient(phi);
  const Plane<Scalar> norm = (gp.dr.square() + gp.dc.square()).sqrt();
  Scalar e = Scalar(0.5) * config.nu * (norm - Scalar(1)).square().sum();

  const Plane<Scalar> h = heaviside(phi, config.tau);
  if (config.mu != Scalar(0)) {
    const Gradient<Scalar> gh = gradient(h);
    e += config.mu * (g_edge * (gh.dr.square() + gh.dc.square()).sqrt()).sum();
  }
  for (int j = 0; j < kFeatureChannels; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (!config.channels[uj] || config.omega[uj] == Scalar(0)) continue;
    const Plane<Scalar>& f = features[j];
    const Scalar m1 = stats.mean(0, j), s1 = stats.sigma(0, j);
    const Scalar m2 = stats.mean(1, j), s2 = stats.sigma(1, j);
    const Scalar c = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
    const Plane<Scalar> lp1 = -std::log(s1) - c - (f - m1).square() / (Scalar(2) * s1 * s1);
    const Plane<Scalar> lp2 = -std::log(s2) - c - (f - m2).square() / (Scalar(2) * s2 * s2);
    e -= config.omega[uj] * (lp1 * h + lp2 * (Scalar(1) - h)).sum();
  }
  return e;
}

/// The terms of one explicit update, before multiplication by eta.
template <typename Scalar>
struct EvolutionForces {
  Plane<Scalar> regularization;  // nu (lap phi - div(grad phi / |grad phi|))
  Plane<Scalar> length;          // mu delta(phi) div(g grad phi / |grad phi|)
  Plane<Scalar> fitting;         // log-likelihood ratio * delta(phi)
};

inline constexpr double kGradientEpsilon = 1e-8;

template <typename Scalar>
EvolutionForces<Scalar> evolution_forces(const LevelSetField<Scalar>& phi,
                                         const FeatureStack<Scalar>& features,
                                         const RegionStats<Scalar>& stats, const Plane<Scalar>& g_edge,
                                         const LevelSetConfig<Scalar>& config) {
  require_same_shape(phi, g_edge, "evolve_step");
  require_same_shape(phi, features[0], "evolve_step");
  const Scalar eps = static_cast<Scalar>(kGradientEpsilon);
  const Gradient<Scalar> gp = gradient(phi);
  const Plane<Scalar> norm = (gp.dr.square() + gp.dc.square() + eps * eps).sqrt();
  const Plane<Scalar> nr = gp.dr / norm;
  const Plane<Scalar> nc = gp.dc / norm;
  const Plane<Scalar> delta = dirac(phi, config.tau);

  EvolutionForces<Scalar> f;
  f.regularization = config.nu * (divergence(gp.dr, gp.dc) - divergence(nr, nc));
  f.length = config.mu * delta * divergence<Scalar>(g_edge * nr, g_edge * nc);
  f.fitting = log_likelihood_ratio(features, stats, config.omega, config.channels) * delta;
  return f;
}

/// One forward-Euler update of the gradient flow. `iteration` only labels
/// the divergence diagnostic.
template <typename Scalar>
LevelSetField<Scalar> evolve_step(const LevelSetField<Scalar>& phi, const FeatureStack<Scalar>& features,
                                  const RegionStats<Scalar>& stats, const Plane<Scalar>& g_edge,
                                  const LevelSetConfig<Scalar>& config, int iteration = 0) {
  const EvolutionForces<Scalar> f = evolution_forces(phi, features, stats, g_edge, config);
  const Plane<Scalar> update = config.eta * (f.regularization + f.length + f.fitting);
  if (!update.allFinite()) {
    throw Error(ErrorCode::Divergence,
                "evolve_step: non-finite update at iteration " + std::to_string(iteration));
  }
  const Scalar largest = update.abs().maxCoeff();
  if (largest > config.divergence_limit) {
    throw Error(ErrorCode::Divergence, "evolve_step: update of " + std::to_string(largest) +
                                           " exceeds the divergence limit at iteration " +
                                           std::to_string(iteration));
  }
  return phi + update;
}

template <typename Scalar>
struct Segmentation {
  BinaryMask mask;
  LevelSetField<Scalar> phi;
  EvolutionDiagnostics<Scalar> diagnostics;
};

/// Evolves phi0 for config.steps iterations against precomputed features.
template <typename Scalar>
Segmentation<Scalar> evolve(const FeatureStack<Scalar>& features, const Plane<Scalar>& g_edge,
                            LevelSetField<Scalar> phi, const LevelSetConfig<Scalar>& config) {
  config.validate();
  require_same_shape(features[0], phi, "evolve");
  require_same_shape(features[0], g_edge, "evolve");
  Segmentation<Scalar> out;
  auto& diag = out.diagnostics;
  diag.energy.reserve(static_cast<std::size_t>(config.steps));
  diag.max_update.reserve(static_cast<std::size_t>(config.steps));
  diag.area.reserve(static_cast<std::size_t>(config.steps));

  RegionStats<Scalar> stats;
  for (int n = 0; n < config.steps; ++n) {
    if (n % config.stats_refresh == 0) {
      stats = region_stats(features, phi, config.tau, config.sigma_floor);
    }
    diag.energy.push_back(energy(phi, features, stats, g_edge, config));
    LevelSetField<Scalar> next = evolve_step(phi, features, stats, g_edge, config, n + 1);
    diag.max_update.push_back((next - phi).abs().maxCoeff());
    diag.area.push_back(static_cast<long>((next > Scalar(0)).count()));
    phi = std::move(next);
    diag.iterations = n + 1;
  }
  out.mask = threshold_mask(phi, Scalar(0));
  out.phi = std::move(phi);
  return out;
}

/// The full fine stage: texture features, prior-based (or supplied)
/// initialization, then the evolution loop.
template <typename Scalar>
Segmentation<Scalar> segment(const GrayImage<Scalar>& image, const ProbMap<Scalar>& prior,
                             const LevelSetConfig<Scalar>& config,
                             const DiffusionParams<Scalar>& diffusion = {},
                             const std::optional<LevelSetField<Scalar>>& phi0 = std::nullopt) {
  config.validate();
  validate_gray(image);
  validate_prob(prior);
  require_same_shape(image, prior, "segment");
  const FeatureStack<Scalar> features = build_features(image, prior, diffusion);
  const Plane<Scalar> g_edge = edge_indicator(image, config.sigma_edge, config.literal_edge_indicator);
  LevelSetField<Scalar> phi =
      phi0 ? *phi0 : init_phi_from_prior(prior, config.init_threshold, config.init_amplitude).phi;
  require_same_shape(image, phi, "segment");
  return evolve(features, g_edge, std::move(phi), config);
}

}  // namespace mcls
