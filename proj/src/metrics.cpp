#include "mcls/metrics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace mcls {

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

struct Moments {
  double mean = 0, std = 0, max = 0, min = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(v.size()));
  m.max = *std::max_element(v.begin(), v.end());
  m.min = *std::min_element(v.begin(), v.end());
  return m;
}

using Field = std::pair<const char*, std::function<double(const OverlapReport&)>>;

const std::array<Field, 6>& ratio_fields() {
  static const std::array<Field, 6> fields{{
      {"dice", [](const OverlapReport& r) { return r.dice; }},
      {"iou", [](const OverlapReport& r) { return r.iou; }},
      {"precision", [](const OverlapReport& r) { return r.precision; }},
      {"recall", [](const OverlapReport& r) { return r.recall; }},
      {"accuracy", [](const OverlapReport& r) { return r.accuracy; }},
      {"f1", [](const OverlapReport& r) { return r.f1; }},
  }};
  return fields;
}

}  // namespace

OverlapReport overlap(const BinaryMask& ps, const BinaryMask& gt) {
  require_same_shape(ps, gt, "overlap");
  validate_mask(ps);
  validate_mask(gt);
  OverlapReport r;
  const auto p = ps.cast<std::int64_t>();
  const auto g = gt.cast<std::int64_t>();
  r.predicted = p.sum();
  r.truth = g.sum();
  r.intersection = (p * g).sum();
  r.union_size = r.predicted + r.truth - r.intersection;
  r.total = static_cast<std::int64_t>(ps.size());
  const std::int64_t true_negative = r.total - r.union_size;

  if (r.union_size == 0) {
    r.both_empty = true;
    r.dice = r.iou = r.precision = r.recall = r.f1 = 1.0;
    r.accuracy = 1.0;
    return r;
  }
  r.dice = ratio(2 * r.intersection, r.predicted + r.truth);
  r.iou = ratio(r.intersection, r.union_size);
  r.precision = ratio(r.intersection, r.predicted);
  r.recall = ratio(r.intersection, r.truth);
  r.accuracy = ratio(r.intersection + true_negative, r.total);
  r.f1 = (r.precision + r.recall) > 0
             ? 2 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

CorpusSummary corpus_summary(const std::vector<OverlapReport>& reports) {
  if (reports.empty()) {
    throw Error(ErrorCode::InvalidArgument, "corpus summary: no reports");
  }
  std::vector<double> dice;
  dice.reserve(reports.size());
  for (const auto& r : reports) dice.push_back(r.dice);
  const Moments m = moments(dice);
  return {reports, m.mean, m.std, m.max, m.min};
}

std::vector<double> default_sweep_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 9; ++k) grid.push_back(k / 10.0);
  for (double extra : {0.0, 0.2, 0.4, 0.6}) {
    if (std::find(grid.begin(), grid.end(), extra) == grid.end()) grid.push_back(extra);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

ThresholdSweep threshold_sweep(const ProbMap<double>& prior, const BinaryMask& gt,
                               const std::vector<double>& thresholds) {
  require_same_shape(prior, gt, "threshold_sweep");
  if (thresholds.empty()) {
    throw Error(ErrorCode::InvalidArgument, "threshold sweep: empty grid");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    if (!(t >= 0.0 && t < 1.0) || (i > 0 && !(t > thresholds[i - 1]))) {
      throw Error(ErrorCode::InvalidArgument,
                  "threshold sweep: thresholds must be strictly ascending and in [0, 1)");
    }
  }
  ThresholdSweep s;
  s.thresholds = thresholds;
  for (double t : thresholds) s.dice.push_back(overlap(threshold_mask(prior, t), gt).dice);
  s.argmax = static_cast<std::size_t>(std::max_element(s.dice.begin(), s.dice.end()) -
                                      s.dice.begin());
  const Moments m = moments(s.dice);
  s.variance = m.std * m.std;
  return s;
}

double pixel_variance(const Plane<double>& map) {
  if (map.size() == 0) return 0.0;
  const double mean = map.mean();
  return (map - mean).square().mean();
}

double pixel_variance(const BinaryMask& mask) { return pixel_variance(mask.cast<double>().eval()); }

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string overlap_csv(const std::vector<NamedReport>& rows) {
  std::ostringstream out;
  out << "# population standard deviation; empty-vs-empty cases score 1\n";
  out << "case";
  for (const auto& [name, get] : ratio_fields()) out << ',' << name;
  out << ",ps,gt,intersection,union,both_empty\n";
  for (const auto& row : rows) {
    out << row.name;
    for (const auto& [name, get] : ratio_fields()) out << ',' << format_number(get(row.report));
    out << ',' << row.report.predicted << ',' << row.report.truth << ','
        << row.report.intersection << ',' << row.report.union_size << ','
        << (row.report.both_empty ? 1 : 0) << '\n';
  }
  if (rows.empty()) return out.str();

  std::array<Moments, 6> stats;
  for (std::size_t k = 0; k < ratio_fields().size(); ++k) {
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(ratio_fields()[k].second(row.report));
    stats[k] = moments(v);
  }
  const std::array<std::pair<const char*, double Moments::*>, 4> footer{
      {{"mean", &Moments::mean}, {"std", &Moments::std}, {"max", &Moments::max},
       {"min", &Moments::min}}};
  for (const auto& [label, member] : footer) {
    out << label;
    for (const auto& m : stats) out << ',' << format_number(m.*member);
    out << ",,,,,\n";
  }
  return out.str();
}

nlohmann::json to_json(const OverlapReport& r) {
  return {{"dice", r.dice},       {"iou", r.iou},           {"precision", r.precision},
          {"recall", r.recall},   {"accuracy", r.accuracy}, {"f1", r.f1},
          {"ps", r.predicted},    {"gt", r.truth},          {"intersection", r.intersection},
          {"union", r.union_size}, {"both-empty", r.both_empty}};
}

nlohmann::json to_json(const CorpusSummary& s) {
  return {{"cases", s.cases.size()}, {"mean", s.mean}, {"std", s.std},
          {"max", s.max},            {"min", s.min},   {"std-convention", "population"}};
}

nlohmann::json overlap_json(const std::vector<NamedReport>& rows) {
  nlohmann::json cases = nlohmann::json::array();
  std::vector<OverlapReport> reports;
  for (const auto& row : rows) {
    nlohmann::json j = to_json(row.report);
    j["case"] = row.name;
    cases.push_back(std::move(j));
    reports.push_back(row.report);
  }
  nlohmann::json out{{"cases", cases}};
  if (!reports.empty()) out["summary"] = to_json(corpus_summary(reports));
  return out;
}

std::string sweep_csv(const ThresholdSweep& sweep) {
  std::ostringstream out;
  out << "beta,dice\n";
  for (std::size_t i = 0; i < sweep.thresholds.size(); ++i) {
    out << format_number(sweep.thresholds[i]) << ',' << format_number(sweep.dice[i]) << '\n';
  }
  out << "# argmax," << format_number(sweep.best_threshold()) << ','
      << format_number(sweep.best_dice()) << '\n';
  out << "# variance," << format_number(sweep.variance) << '\n';
  return out.str();
}

}  // namespace mcls
