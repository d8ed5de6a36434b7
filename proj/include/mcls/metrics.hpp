#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcls/image.hpp"

namespace mcls {

struct OverlapReport {
  double dice = 0;
  double iou = 0;
  double precision = 0;
  double recall = 0;
  double accuracy = 0;
  double f1 = 0;
  std::int64_t predicted = 0;     // |PS|
  std::int64_t truth = 0;         // |GT|
  std::int64_t intersection = 0;  // |PS & GT|
  std::int64_t union_size = 0;    // |PS | GT|
  std::int64_t total = 0;         // pixel count
  bool both_empty = false;
};

/// Overlap of a prediction with the ground truth. Two empty masks score 1 on
/// every ratio (and the report says so).
OverlapReport overlap(const BinaryMask& ps, const BinaryMask& gt);

/// Mean, population standard deviation, max and min of the Dice values.
struct CorpusSummary {
  std::vector<OverlapReport> cases;
  double mean = 0;
  double std = 0;
  double max = 0;
  double min = 0;
};

CorpusSummary corpus_summary(const std::vector<OverlapReport>& reports);

struct ThresholdSweep {
  std::vector<double> thresholds;
  std::vector<double> dice;
  std::size_t argmax = 0;  // first index attaining the maximum
  double variance = 0;     // population variance of the Dice values

  double best_threshold() const { return thresholds.at(argmax); }
  double best_dice() const { return dice.at(argmax); }
};

/// {0.0, 0.1, ..., 0.9} merged with {0, 0.2, 0.4, 0.6}, ascending, no duplicates.
std::vector<double> default_sweep_grid();

/// Dice of {prior > beta} against gt for each beta. Thresholds must be
/// ascending and in [0, 1).
ThresholdSweep threshold_sweep(const ProbMap<double>& prior, const BinaryMask& gt,
                               const std::vector<double>& thresholds);

/// Population variance of all pixel values.
double pixel_variance(const Plane<double>& map);
double pixel_variance(const BinaryMask& mask);

// Reports. Floats are printed with 17 significant digits so that reruns are
// byte-identical and values re-parse exactly.
std::string format_number(double v);

struct NamedReport {
  std::string name;
  OverlapReport report;
};

/// One row per case plus a summary footer row (population std).
std::string overlap_csv(const std::vector<NamedReport>& rows);
nlohmann::json overlap_json(const std::vector<NamedReport>& rows);
std::string sweep_csv(const ThresholdSweep& sweep);
nlohmann::json to_json(const OverlapReport& r);
nlohmann::json to_json(const CorpusSummary& s);

}  // namespace mcls
