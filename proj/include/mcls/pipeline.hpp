#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcls/level_set.hpp"
#include "mcls/metrics.hpp"
#include "mcls/synth.hpp"

namespace mcls {

namespace fs = std::filesystem;

/// Overrides the output directory (and nothing else) when set.
inline constexpr const char* kOutputDirEnv = "MCLS_OUTPUT_DIR";

struct RunConfig {
  LevelSetConfig<double> level_set;
  DiffusionParams<double> diffusion;

  std::string image;
  std::string prior;
  std::string gt;
  std::string output_dir = "out";

  bool no_position = false;  // centered circle instead of the prior for phi0
  bool no_texture = false;
  bool no_prior = false;     // drop the prior cue (phi0 still comes from the prior)
  bool color_overlay = false;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Unknown keys are rejected; missing keys keep their defaults.
void from_json(const nlohmann::json& j, RunConfig& c);

/// The level-set configuration with the ablation switches applied.
LevelSetConfig<double> effective_level_set(const RunConfig& config);

struct SegmentOutcome {
  Segmentation<double> seg;
  bool empty_background = false;
};

/// One segmentation run honoring the ablation switches.
SegmentOutcome run_segment(const GrayImage<double>& image, const ProbMap<double>& prior,
                           const RunConfig& config);

std::string diagnostics_csv(const EvolutionDiagnostics<double>& diag);

/// Gray overlay: 0 background, 128 where exactly one of prediction / truth is
/// set, 255 where both agree. Without a truth mask predicted pixels are 255.
GrayImage<double> overlay_levels(const BinaryMask& pred, const std::optional<BinaryMask>& gt);
/// Colour overlay: prediction red, truth green, overlap yellow.
void write_overlay_ppm(const BinaryMask& pred, const std::optional<BinaryMask>& gt,
                       const fs::path& path);

/// Writes mask.pgm, phi.fmap, diagnostics.csv, overlay.pgm (or overlay.ppm)
/// and config.json (the effective configuration) into dir.
void write_segment_outputs(const fs::path& dir, const SegmentOutcome& outcome,
                           const std::optional<BinaryMask>& gt, const RunConfig& config);

// Corpus layout: one subdirectory per case holding image.pgm, gt.pgm,
// prior.fmap and spec.json, plus manifest.json at the top.
inline constexpr const char* kManifest = "manifest.json";

/// Case k uses seed base.seed + k. Returns the case names.
std::vector<std::string> write_corpus(const SynthCaseSpec& base, int count, const fs::path& dir);
std::vector<std::string> corpus_cases(const fs::path& dir);
std::string case_name(int index);

struct CorpusCase {
  std::string name;
  GrayImage<double> image;
  BinaryMask gt;
  ProbMap<double> prior;
};
CorpusCase load_case(const fs::path& corpus_dir, const std::string& name);

/// Segments every case of a corpus into out_dir/<case>/.
std::vector<NamedReport> segment_corpus(const fs::path& corpus_dir, const RunConfig& config,
                                        const fs::path& out_dir);

struct VarianceRow {
  std::string name;
  double prior = 0;
  double result = 0;
  // "lower", "higher" or "equal": the result compared with the prior.
  std::string direction;
};
std::string variance_direction(double prior, double result);
std::string variance_csv(const std::vector<VarianceRow>& rows);

struct EvalResult {
  std::vector<NamedReport> rows;
  std::vector<VarianceRow> variance;
  std::vector<std::string> missing;  // files that were looked for and absent
};

/// Compares pred_dir/<case>/mask.pgm with gt_dir/<case>/gt.pgm for every case
/// found in either directory. When gt_dir/<case>/prior.fmap exists the pixel
/// variances of prior and prediction are compared as well.
EvalResult evaluate_dirs(const fs::path& pred_dir, const fs::path& gt_dir);

enum class Ablation { Full, NoPosition, NoTexture, NoPrior, NoPriorNoTexture };
inline constexpr std::array<Ablation, 5> kAblations{Ablation::Full, Ablation::NoPosition,
                                                    Ablation::NoTexture, Ablation::NoPrior,
                                                    Ablation::NoPriorNoTexture};
std::string to_string(Ablation a);
RunConfig with_ablation(RunConfig config, Ablation a);

struct AblationRow {
  Ablation ablation;
  std::vector<double> dice;  // per case, corpus order
  CorpusSummary summary;
};

std::vector<AblationRow> run_ablation(const fs::path& corpus_dir, const RunConfig& config);
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace mcls
