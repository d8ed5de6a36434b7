#include "mcls/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mcls/filters.hpp"

namespace mcls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kStripeAngle = 0.7;

// Star-shaped region around a center, described by its boundary radius as a
// function of the polar angle.
struct StarShape {
  double center_r = 0;
  double center_c = 0;
  ShapeKind kind = ShapeKind::Disk;
  double radius = 0;
  double semi_r = 0, semi_c = 0, angle = 0;
  std::array<double, 3> harmonic_amp{};
  std::array<double, 3> harmonic_phase{};

  double boundary(double theta) const {
    switch (kind) {
      case ShapeKind::Disk:
        return radius;
      case ShapeKind::Ellipse: {
        const double u = std::cos(theta - angle) / semi_c;
        const double v = std::sin(theta - angle) / semi_r;
        return 1.0 / std::sqrt(u * u + v * v);
      }
      case ShapeKind::Blob: {
        double scale = 1.0;
        for (std::size_t k = 0; k < harmonic_amp.size(); ++k) {
          scale += harmonic_amp[k] * std::cos(static_cast<double>(k + 2) * theta + harmonic_phase[k]);
        }
        return radius * scale;
      }
    }
    return radius;
  }

  bool contains(double r, double c) const {
    const double y = r - center_r, x = c - center_c;
    const double rho = std::hypot(x, y);
    if (rho == 0.0) return true;
    return rho <= boundary(std::atan2(y, x));
  }

  bool fits(int width, int height) const {
    for (int k = 0; k < 720; ++k) {
      const double theta = 2.0 * kPi * k / 720.0;
      const double rho = boundary(theta);
      const double r = center_r + rho * std::sin(theta);
      const double c = center_c + rho * std::cos(theta);
      if (r < 0 || c < 0 || r > height - 1 || c > width - 1) return false;
    }
    return true;
  }

  // Distance from the center to the boundary along theta.
  double reach(double theta) const { return boundary(theta); }

  BinaryMask rasterize(int width, int height) const {
    BinaryMask m(height, width);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) m(r, c) = contains(r, c) ? 1 : 0;
    }
    return m;
  }
};

double stripes(double amplitude, double period, int r, int c) {
  return amplitude *
         std::sin(2.0 * kPi * (c * std::cos(kStripeAngle) + r * std::sin(kStripeAngle)) / period);
}

StarShape make_target(const SynthCaseSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  StarShape s;
  s.kind = spec.shape;
  s.center_r = spec.center_r < 0 ? (spec.height - 1) / 2.0 : spec.center_r;
  s.center_c = spec.center_c < 0 ? (spec.width - 1) / 2.0 : spec.center_c;
  double scale = 1.0;
  if (spec.jitter > 0) {
    s.center_r += spec.jitter * unit(rng);
    s.center_c += spec.jitter * unit(rng);
    scale += 0.1 * unit(rng);
  }
  s.radius = spec.radius * scale;
  s.semi_r = spec.semi_axis_r * scale;
  s.semi_c = spec.semi_axis_c * scale;
  s.angle = spec.angle;
  if (spec.jitter > 0) s.angle += kPi * unit(rng);
  if (spec.shape == ShapeKind::Blob) {
    for (std::size_t k = 0; k < s.harmonic_amp.size(); ++k) {
      s.harmonic_amp[k] = spec.blob_irregularity * (0.5 + 0.5 * std::abs(unit(rng))) /
                          static_cast<double>(k + 1);
      s.harmonic_phase[k] = kPi * unit(rng);
    }
  }
  return s;
}

void check_spec(const SynthCaseSpec& spec) {
  if (spec.width < 3 || spec.height < 3) {
    throw Error(ErrorCode::InvalidArgument, "synthetic case: canvas must be at least 3x3");
  }
  if (!(spec.radius > 0) || !(spec.semi_axis_r > 0) || !(spec.semi_axis_c > 0)) {
    throw Error(ErrorCode::InvalidArgument, "synthetic case: shape size must be positive");
  }
  const auto in_range = [](double v) { return v >= 0.0 && v <= 255.0; };
  if (!in_range(spec.foreground) || !in_range(spec.background)) {
    throw Error(ErrorCode::InvalidArgument, "synthetic case: intensities must be in [0, 255]");
  }
  if (spec.noise_sigma < 0 || spec.prior_blur_sigma < 0 || spec.prior_noise_sigma < 0 ||
      spec.corruption_radius < 0 || spec.outlier_count < 0 || spec.outlier_radius <= 0 ||
      spec.distractors < 0 || spec.touching_distractors < 0 || spec.distractor_radius <= 0 || spec.texture_period <= 0 ||
      spec.jitter < 0 || spec.blob_irregularity < 0 || spec.blob_irregularity >= 0.5) {
    throw Error(ErrorCode::InvalidArgument, "synthetic case: parameter out of range");
  }
}

void paint_disk(BinaryMask& m, double cr, double cc, double radius) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double dr = r - cr, dc = c - cc;
      if (dr * dr + dc * dc <= radius * radius) m(r, c) = 1;
    }
  }
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, double radius) {
  const int k = static_cast<int>(std::floor(radius));
  BinaryMask out = mask;
  const Eigen::Index rows = mask.rows(), cols = mask.cols();
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!mask(r, c)) continue;
      bool keep = true;
      for (int dr = -k; dr <= k && keep; ++dr) {
        for (int dc = -k; dc <= k; ++dc) {
          if (dr * dr + dc * dc > radius * radius) continue;
          const Eigen::Index rr = r + dr, cc = c + dc;
          // Outside the canvas counts as background.
          if (rr < 0 || cc < 0 || rr >= rows || cc >= cols || !mask(rr, cc)) {
            keep = false;
            break;
          }
        }
      }
      out(r, c) = keep ? 1 : 0;
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, double radius) {
  const int k = static_cast<int>(std::floor(radius));
  BinaryMask out = BinaryMask::Zero(mask.rows(), mask.cols());
  const Eigen::Index rows = mask.rows(), cols = mask.cols();
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!mask(r, c)) continue;
      for (int dr = -k; dr <= k; ++dr) {
        for (int dc = -k; dc <= k; ++dc) {
          if (dr * dr + dc * dc > radius * radius) continue;
          const Eigen::Index rr = r + dr, cc = c + dc;
          if (rr >= 0 && cc >= 0 && rr < rows && cc < cols) out(rr, cc) = 1;
        }
      }
    }
  }
  return out;
}

int label_components(const BinaryMask& mask, Plane<int>& labels) {
  labels = Plane<int>::Zero(mask.rows(), mask.cols());
  int next = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    for (Eigen::Index c = 0; c < mask.cols(); ++c) {
      if (!mask(r, c) || labels(r, c)) continue;
      ++next;
      labels(r, c) = next;
      stack.assign(1, {r, c});
      while (!stack.empty()) {
        const auto [pr, pc] = stack.back();
        stack.pop_back();
        constexpr std::array<std::pair<int, int>, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
        for (const auto& [dr, dc] : kSteps) {
          const Eigen::Index nr = pr + dr, nc = pc + dc;
          if (nr < 0 || nc < 0 || nr >= mask.rows() || nc >= mask.cols()) continue;
          if (!mask(nr, nc) || labels(nr, nc)) continue;
          labels(nr, nc) = next;
          stack.emplace_back(nr, nc);
        }
      }
    }
  }
  return next;
}

SyntheticCase make_synthetic_case(const SynthCaseSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const StarShape target = make_target(spec, rng);
  if (!target.fits(spec.width, spec.height)) {
    throw Error(ErrorCode::InvalidArgument, "synthetic case: shape exceeds the canvas");
  }
  SyntheticCase out;
  out.gt = target.rasterize(spec.width, spec.height);

  // Distractors: kept clear of the target except for the touching ones, which
  // sit at evenly spaced angles and alternate smooth / textured.
  std::vector<std::pair<BinaryMask, bool>> distractors;
  const BinaryMask keep_out = dilate(out.gt, 4.0);
  const double theta0 = 2.0 * kPi * uniform(rng);
  for (int k = 0; k < spec.touching_distractors; ++k) {
    const double theta = theta0 + 2.0 * kPi * k / spec.touching_distractors;
    const double d = target.reach(theta) + 0.7 * spec.distractor_radius;
    BinaryMask m = BinaryMask::Zero(spec.height, spec.width);
    paint_disk(m, target.center_r + d * std::sin(theta), target.center_c + d * std::cos(theta),
               spec.distractor_radius);
    distractors.emplace_back(std::move(m), k % 2 == 1);
  }
  for (int k = 0; k < spec.distractors; ++k) {
    const double rad = spec.distractor_radius * (0.8 + 0.4 * uniform(rng));
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double cr = rad + uniform(rng) * (spec.height - 1 - 2 * rad);
      const double cc = rad + uniform(rng) * (spec.width - 1 - 2 * rad);
      BinaryMask m = BinaryMask::Zero(spec.height, spec.width);
      paint_disk(m, cr, cc, rad);
      bool clear = !(m.cast<bool>() && keep_out.cast<bool>()).any();
      for (const auto& [other, textured] : distractors) {
        clear = clear && !(m.cast<bool>() && other.cast<bool>()).any();
      }
      if (clear) {
        distractors.emplace_back(std::move(m), k % 2 == 0);
        break;
      }
    }
  }

  GrayImage<double> image = GrayImage<double>::Constant(spec.height, spec.width, spec.background);
  for (const auto& [m, textured] : distractors) {
    for (int r = 0; r < spec.height; ++r) {
      for (int c = 0; c < spec.width; ++c) {
        if (!m(r, c)) continue;
        image(r, c) = spec.foreground +
                      (textured ? stripes(spec.texture_amplitude, spec.texture_period, r, c) : 0.0);
      }
    }
  }
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      if (out.gt(r, c)) {
        image(r, c) = spec.foreground + stripes(spec.texture_amplitude, spec.texture_period, r, c);
      }
    }
  }
  if (spec.noise_sigma > 0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (Eigen::Index i = 0; i < image.size(); ++i) image.data()[i] += noise(rng);
  }
  out.image = image.max(0.0).min(255.0);

  BinaryMask base = out.gt;
  switch (spec.corruption) {
    case PriorCorruption::None:
      break;
    case PriorCorruption::Erode:
      base = erode(base, spec.corruption_radius);
      break;
    case PriorCorruption::Dilate:
      base = dilate(base, spec.corruption_radius);
      break;
    case PriorCorruption::Outliers: {
      const BinaryMask clear_of = dilate(out.gt, spec.outlier_radius + 3.0);
      int placed = 0;
      for (int attempt = 0; attempt < 500 && placed < spec.outlier_count; ++attempt) {
        const double rad = spec.outlier_radius;
        const double cr = rad + uniform(rng) * (spec.height - 1 - 2 * rad);
        const double cc = rad + uniform(rng) * (spec.width - 1 - 2 * rad);
        BinaryMask island = BinaryMask::Zero(spec.height, spec.width);
        paint_disk(island, cr, cc, rad);
        if ((island.cast<bool>() && clear_of.cast<bool>()).any()) continue;
        base = base.max(island);
        ++placed;
      }
      break;
    }
  }
  ProbMap<double> prior = gaussian_blur(base.cast<double>().eval(), spec.prior_blur_sigma);
  if (spec.prior_noise_sigma > 0) {
    std::normal_distribution<double> noise(0.0, spec.prior_noise_sigma);
    for (Eigen::Index i = 0; i < prior.size(); ++i) prior.data()[i] += noise(rng);
  }
  out.prior = prior.max(0.0).min(1.0);
  return out;
}

SynthCaseSpec canonical_disk_spec(std::uint64_t seed) {
  SynthCaseSpec spec;
  spec.seed = seed;
  spec.width = 128;
  spec.height = 128;
  spec.shape = ShapeKind::Disk;
  spec.radius = 30.0;
  spec.foreground = 150.0;
  spec.background = 80.0;
  spec.noise_sigma = 10.0;
  spec.prior_blur_sigma = 5.0;
  spec.corruption = PriorCorruption::Erode;
  spec.corruption_radius = 2.0;
  return spec;
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Disk:
      return "disk";
    case ShapeKind::Ellipse:
      return "ellipse";
    case ShapeKind::Blob:
      return "blob";
  }
  return "disk";
}

std::string to_string(PriorCorruption corruption) {
  switch (corruption) {
    case PriorCorruption::None:
      return "none";
    case PriorCorruption::Erode:
      return "erode";
    case PriorCorruption::Dilate:
      return "dilate";
    case PriorCorruption::Outliers:
      return "outliers";
  }
  return "none";
}

namespace {

ShapeKind shape_from_string(const std::string& s) {
  if (s == "disk") return ShapeKind::Disk;
  if (s == "ellipse") return ShapeKind::Ellipse;
  if (s == "blob") return ShapeKind::Blob;
  throw Error(ErrorCode::InvalidArgument, "unknown shape '" + s + "'");
}

PriorCorruption corruption_from_string(const std::string& s) {
  if (s == "none") return PriorCorruption::None;
  if (s == "erode") return PriorCorruption::Erode;
  if (s == "dilate") return PriorCorruption::Dilate;
  if (s == "outliers") return PriorCorruption::Outliers;
  throw Error(ErrorCode::InvalidArgument, "unknown prior corruption '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const SynthCaseSpec& s) {
  j = nlohmann::json{{"seed", s.seed},
                     {"width", s.width},
                     {"height", s.height},
                     {"shape", to_string(s.shape)},
                     {"center-r", s.center_r},
                     {"center-c", s.center_c},
                     {"radius", s.radius},
                     {"semi-axis-r", s.semi_axis_r},
                     {"semi-axis-c", s.semi_axis_c},
                     {"angle", s.angle},
                     {"blob-irregularity", s.blob_irregularity},
                     {"jitter", s.jitter},
                     {"foreground", s.foreground},
                     {"background", s.background},
                     {"noise-sigma", s.noise_sigma},
                     {"texture-amplitude", s.texture_amplitude},
                     {"texture-period", s.texture_period},
                     {"distractors", s.distractors},
                     {"distractor-radius", s.distractor_radius},
                     {"touching-distractors", s.touching_distractors},
                     {"prior-blur-sigma", s.prior_blur_sigma},
                     {"prior-noise-sigma", s.prior_noise_sigma},
                     {"prior-corruption", to_string(s.corruption)},
                     {"corruption-radius", s.corruption_radius},
                     {"outlier-count", s.outlier_count},
                     {"outlier-radius", s.outlier_radius}};
}

void from_json(const nlohmann::json& j, SynthCaseSpec& s) {
  static const std::array<const char*, 26> kKnown{
      "seed", "width", "height", "shape", "center-r", "center-c", "radius", "semi-axis-r",
      "semi-axis-c", "angle", "blob-irregularity", "jitter", "foreground", "background",
      "noise-sigma", "texture-amplitude", "texture-period", "distractors", "distractor-radius",
      "touching-distractors", "prior-blur-sigma", "prior-noise-sigma", "prior-corruption",
      "corruption-radius", "outlier-count", "outlier-radius"};
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "synthetic spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw Error(ErrorCode::InvalidArgument, "synthetic spec: unknown key '" + key + "'");
    }
  }
  try {
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("seed", s.seed);
    get("width", s.width);
    get("height", s.height);
    if (j.contains("shape")) s.shape = shape_from_string(j.at("shape").get<std::string>());
    get("center-r", s.center_r);
    get("center-c", s.center_c);
    get("radius", s.radius);
    get("semi-axis-r", s.semi_axis_r);
    get("semi-axis-c", s.semi_axis_c);
    get("angle", s.angle);
    get("blob-irregularity", s.blob_irregularity);
    get("jitter", s.jitter);
    get("foreground", s.foreground);
    get("background", s.background);
    get("noise-sigma", s.noise_sigma);
    get("texture-amplitude", s.texture_amplitude);
    get("texture-period", s.texture_period);
    get("distractors", s.distractors);
    get("distractor-radius", s.distractor_radius);
    get("touching-distractors", s.touching_distractors);
    get("prior-blur-sigma", s.prior_blur_sigma);
    get("prior-noise-sigma", s.prior_noise_sigma);
    if (j.contains("prior-corruption")) {
      s.corruption = corruption_from_string(j.at("prior-corruption").get<std::string>());
    }
    get("corruption-radius", s.corruption_radius);
    get("outlier-count", s.outlier_count);
    get("outlier-radius", s.outlier_radius);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("synthetic spec: ") + e.what());
  }
}

}  // namespace mcls
