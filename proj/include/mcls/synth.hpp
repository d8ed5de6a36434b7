#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "mcls/image.hpp"

namespace mcls {

enum class ShapeKind { Disk, Ellipse, Blob };
enum class PriorCorruption { None, Erode, Dilate, Outliers };

/// Recipe for one synthetic case. Identical specs yield bit-identical cases.
struct SynthCaseSpec {
  std::uint64_t seed = 0;
  int width = 128;
  int height = 128;

  ShapeKind shape = ShapeKind::Disk;
  // Shape center in pixel coordinates; negative means canvas center.
  double center_r = -1.0;
  double center_c = -1.0;
  double radius = 30.0;       // disk radius, blob base radius
  double semi_axis_r = 20.0;  // ellipse
  double semi_axis_c = 30.0;  // ellipse
  double angle = 0.0;         // ellipse rotation, radians
  double blob_irregularity = 0.15;
  // Uniform random offset (pixels) applied to the center, and relative scale
  // jitter applied to the size, drawn from the seed.
  double jitter = 0.0;

  double foreground = 150.0;
  double background = 80.0;
  double noise_sigma = 10.0;
  // Sinusoidal stripes added inside the target (0 disables).
  double texture_amplitude = 0.0;
  double texture_period = 6.0;

  // Clutter: distractor shapes at the foreground mean intensity that are not
  // part of the ground truth. Even-numbered ones carry the target texture,
  // odd-numbered ones are smooth. Touching distractors abut the target.
  int distractors = 0;
  double distractor_radius = 12.0;
  int touching_distractors = 0;

  double prior_blur_sigma = 5.0;
  double prior_noise_sigma = 0.0;
  PriorCorruption corruption = PriorCorruption::None;
  double corruption_radius = 2.0;  // erode / dilate radius in pixels
  int outlier_count = 3;
  double outlier_radius = 8.0;
};

struct SyntheticCase {
  GrayImage<double> image;
  BinaryMask gt;
  ProbMap<double> prior;
};

SyntheticCase make_synthetic_case(const SynthCaseSpec& spec);

/// The canonical single-object case: 128x128 disk of radius 30, 150 on 80,
/// noise 10, prior = gt eroded by 2 px then blurred with sigma 5.
SynthCaseSpec canonical_disk_spec(std::uint64_t seed = 0);

/// Morphology with a disk structuring element of the given radius.
BinaryMask erode(const BinaryMask& mask, double radius);
BinaryMask dilate(const BinaryMask& mask, double radius);

/// 4-connected component labels (0 = background); returns the count.
int label_components(const BinaryMask& mask, Plane<int>& labels);

void to_json(nlohmann::json& j, const SynthCaseSpec& spec);
void from_json(const nlohmann::json& j, SynthCaseSpec& spec);

std::string to_string(ShapeKind kind);
std::string to_string(PriorCorruption corruption);

}  // namespace mcls
