// mcls: command-line front end for the multi-cue level-set segmenter.
//
//   mcls segment --image img.pgm --prior prior.fmap [--gt gt.pgm] --out dir
//   mcls segment --corpus corpus/ --out results/
//   mcls synth   --count 20 --out corpus/ [--spec spec.json]
//   mcls eval    --pred results/ --gt corpus/ [--out dir]
//   mcls sweep   --prior prior.fmap --gt gt.pgm [--grid 0.1,0.3,0.5]
//   mcls ablate  --corpus corpus/ --out dir
//
// Exit codes: 0 ok, 2 usage, 3 I/O or parse, 4 dimension, 5 divergence,
// 6 contour collapse.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mcls/io.hpp"
#include "mcls/metrics.hpp"
#include "mcls/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mcls;

namespace {

// Flags that override fields of a RunConfig loaded from --config.
struct ConfigFlags {
  std::string config_file;
  std::optional<double> eta, nu, mu, tau, sigma_edge, init_threshold, init_amplitude, sigma_floor,
      divergence_limit, diffusion_tau, diffusion_p, diffusion_step_size, intensity_scale;
  std::optional<int> steps, stats_refresh, diffusion_steps;
  std::vector<double> omega;
  std::vector<int> channels;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  bool literal_edge = false, no_position = false, no_texture = false, no_prior = false,
       color = false;
  std::string write_config;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--out,--output-dir", output_dir, "Output directory");
    app->add_option("--eta", eta, "Time step");
    app->add_option("--nu", nu, "Distance regularization weight");
    app->add_option("--mu", mu, "Length term weight");
    app->add_option("--tau", tau, "Heaviside width");
    app->add_option("--omega", omega, "Five cue weights")->expected(5);
    app->add_option("--sigma-edge", sigma_edge, "Edge indicator Gaussian scale");
    app->add_option("--steps", steps, "Evolution iterations");
    app->add_option("--init-threshold", init_threshold, "Prior threshold for the initial contour");
    app->add_option("--init-amplitude", init_amplitude, "Binary-step magnitude");
    app->add_option("--channels", channels, "Five 0/1 cue toggles")->expected(5);
    app->add_option("--sigma-floor", sigma_floor, "Lower bound on region sigmas");
    app->add_option("--stats-refresh", stats_refresh, "Iterations between statistics updates");
    app->add_option("--divergence-limit", divergence_limit, "Largest tolerated update");
    app->add_option("--diffusion-tau", diffusion_tau, "Diffusivity singularity guard");
    app->add_option("--diffusion-p", diffusion_p, "Diffusivity exponent");
    app->add_option("--diffusion-step-size", diffusion_step_size, "AOS time step");
    app->add_option("--diffusion-steps", diffusion_steps, "AOS steps");
    app->add_option("--intensity-scale", intensity_scale,
                    "Gray multiplier applied before the structure tensor");
    app->add_option("--seed", seed, "RNG seed recorded with the run");
    app->add_flag("--literal-edge-indicator", literal_edge, "Use 1/(1+|K*I|) as edge indicator");
    app->add_flag("--no-position", no_position, "Start from a centered circle");
    app->add_flag("--no-texture", no_texture, "Disable the texture cues");
    app->add_flag("--no-prior", no_prior, "Disable the prior cue");
    app->add_flag("--color", color, "Write the overlay as a colour PPM");
    app->add_option("--write-config", write_config, "Also write the effective config here");
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config_file.empty()) {
      const std::vector<unsigned char> bytes = read_bytes(config_file);
      const auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::Parse, "config is not valid JSON: " + config_file);
      c = j.get<RunConfig>();
    }
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.output_dir = env;
    auto& ls = c.level_set;
    auto& d = c.diffusion;
    const auto set = [](auto& field, const auto& opt) {
      if (opt) field = *opt;
    };
    set(c.output_dir, output_dir);
    set(ls.eta, eta);
    set(ls.nu, nu);
    set(ls.mu, mu);
    set(ls.tau, tau);
    set(ls.sigma_edge, sigma_edge);
    set(ls.steps, steps);
    set(ls.init_threshold, init_threshold);
    set(ls.init_amplitude, init_amplitude);
    set(ls.sigma_floor, sigma_floor);
    set(ls.stats_refresh, stats_refresh);
    set(ls.divergence_limit, divergence_limit);
    set(d.tau, diffusion_tau);
    set(d.p, diffusion_p);
    set(d.step_size, diffusion_step_size);
    set(d.steps, diffusion_steps);
    set(d.intensity_scale, intensity_scale);
    set(c.seed, seed);
    for (std::size_t k = 0; k < omega.size(); ++k) ls.omega[k] = omega[k];
    for (std::size_t k = 0; k < channels.size(); ++k) ls.channels[k] = channels[k] != 0;
    if (literal_edge) ls.literal_edge_indicator = true;
    if (no_position) c.no_position = true;
    if (no_texture) c.no_texture = true;
    if (no_prior) c.no_prior = true;
    if (color) c.color_overlay = true;
    ls.validate();
    d.validate();
    return c;
  }

  void maybe_write(const RunConfig& c) const {
    if (!write_config.empty()) write_text_atomic(write_config, nlohmann::json(c).dump(2) + "\n");
  }
};

int run_segment_cmd(const ConfigFlags& flags, const std::string& image, const std::string& prior,
                    const std::string& gt, const std::string& corpus) {
  RunConfig config = flags.resolve();
  if (!image.empty()) config.image = image;
  if (!prior.empty()) config.prior = prior;
  if (!gt.empty()) config.gt = gt;
  flags.maybe_write(config);

  if (!corpus.empty()) {
    const auto rows = segment_corpus(corpus, config, config.output_dir);
    write_text_atomic(fs::path(config.output_dir) / "metrics.csv", overlap_csv(rows));
    std::vector<OverlapReport> reports;
    for (const auto& r : rows) reports.push_back(r.report);
    if (!reports.empty()) {
      const CorpusSummary s = corpus_summary(reports);
      std::cout << "cases " << rows.size() << " dice mean " << format_number(s.mean) << " std "
                << format_number(s.std) << " min " << format_number(s.min) << " max "
                << format_number(s.max) << '\n';
    } else {
      std::cout << "cases 0\n";
    }
    return 0;
  }
  if (config.image.empty() || config.prior.empty()) {
    throw Error(ErrorCode::Usage, "segment needs --image and --prior (or --corpus)");
  }
  const GrayImage<double> img = read_pgm(config.image);
  const ProbMap<double> pm = read_prob_map(config.prior);
  std::optional<BinaryMask> truth;
  if (!config.gt.empty()) truth = read_mask_pgm(config.gt);
  if (truth) require_same_shape(img, *truth, "ground truth");
  const SegmentOutcome outcome = run_segment(img, pm, config);
  write_segment_outputs(config.output_dir, outcome, truth, config);
  if (outcome.empty_background) {
    std::cerr << "warning: every pixel starts inside the contour (empty background)\n";
  }
  std::cout << "iterations " << outcome.seg.diagnostics.iterations << " area "
            << outcome.seg.mask.cast<long>().sum();
  if (truth) std::cout << " dice " << format_number(overlap(outcome.seg.mask, *truth).dice);
  std::cout << '\n';
  return 0;
}

int run_synth_cmd(const std::string& spec_path, int count, const std::string& out,
                  std::optional<std::uint64_t> seed) {
  SynthCaseSpec spec = canonical_disk_spec();
  if (!spec_path.empty()) {
    const std::vector<unsigned char> bytes = read_bytes(spec_path);
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::Parse, "spec is not valid JSON: " + spec_path);
    spec = j.get<SynthCaseSpec>();
  }
  if (seed) spec.seed = *seed;
  fs::path dir = out;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env && out.empty()) dir = env;
  if (dir.empty()) throw Error(ErrorCode::Usage, "synth needs --out");
  const auto names = write_corpus(spec, count, dir);
  std::cout << "wrote " << names.size() << " cases to " << dir.string() << '\n';
  return 0;
}

int run_eval_cmd(const std::string& pred, const std::string& gt, const std::string& out) {
  const EvalResult r = evaluate_dirs(pred, gt);
  for (const auto& m : r.missing) std::cerr << "missing: " << m << '\n';
  const std::string csv = overlap_csv(r.rows);
  if (!out.empty()) {
    fs::create_directories(out);
    write_text_atomic(fs::path(out) / "eval.csv", csv);
    write_text_atomic(fs::path(out) / "eval.json", overlap_json(r.rows).dump(2) + "\n");
    if (!r.variance.empty()) {
      write_text_atomic(fs::path(out) / "variance.csv", variance_csv(r.variance));
    }
  } else {
    std::cout << csv;
  }
  if (!r.rows.empty()) {
    std::vector<OverlapReport> reports;
    for (const auto& row : r.rows) reports.push_back(row.report);
    const CorpusSummary s = corpus_summary(reports);
    std::cerr << "cases " << r.rows.size() << " dice mean " << format_number(s.mean) << " std "
              << format_number(s.std) << '\n';
  }
  if (!r.missing.empty()) {
    std::cerr << r.missing.size() << " file(s) missing; affected cases skipped\n";
    return exit_code(ErrorCode::Io);
  }
  return 0;
}

int run_sweep_cmd(const std::string& prior, const std::string& gt, const std::vector<double>& grid,
                  const std::string& out) {
  const ProbMap<double> pm = read_prob_map(prior);
  const BinaryMask truth = read_mask_pgm(gt);
  const ThresholdSweep s = threshold_sweep(pm, truth, grid.empty() ? default_sweep_grid() : grid);
  const std::string csv = sweep_csv(s);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text_atomic(out, csv);
  }
  return 0;
}

int run_ablate_cmd(const ConfigFlags& flags, const std::string& corpus) {
  const RunConfig config = flags.resolve();
  flags.maybe_write(config);
  const auto rows = run_ablation(corpus, config);
  const std::string table = ablation_csv(rows);
  fs::create_directories(config.output_dir);
  write_text_atomic(fs::path(config.output_dir) / "ablation.csv", table);

  std::ostringstream cases;
  cases << "case";
  for (const auto& r : rows) cases << ',' << to_string(r.ablation);
  cases << '\n';
  const auto names = corpus_cases(corpus);
  for (std::size_t i = 0; i < names.size(); ++i) {
    cases << names[i];
    for (const auto& r : rows) cases << ',' << format_number(r.dice[i]);
    cases << '\n';
  }
  write_text_atomic(fs::path(config.output_dir) / "ablation_cases.csv", cases.str());
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cue level-set segmentation"};
  app.require_subcommand(1);

  ConfigFlags seg_flags, abl_flags;
  std::string image, prior, gt, corpus;
  CLI::App* seg = app.add_subcommand("segment", "Segment one image, or every case of a corpus");
  seg->add_option("--image", image, "Input PGM");
  seg->add_option("--prior", prior, "Prior probability FMAP");
  seg->add_option("--gt", gt, "Optional ground-truth mask PGM");
  seg->add_option("--corpus", corpus, "Corpus directory written by synth");
  seg_flags.attach(seg);

  std::string spec_path, synth_out;
  int count = 1;
  std::optional<std::uint64_t> synth_seed;
  CLI::App* syn = app.add_subcommand("synth", "Generate a synthetic corpus");
  syn->add_option("--spec", spec_path, "Case spec JSON (default: the canonical disk case)")
      ->check(CLI::ExistingFile);
  syn->add_option("--count", count, "Number of cases")->check(CLI::NonNegativeNumber);
  syn->add_option("--out,--output-dir", synth_out, "Corpus directory");
  syn->add_option("--seed", synth_seed, "Base seed (case k uses seed + k)");

  std::string pred_dir, gt_dir, eval_out;
  CLI::App* ev = app.add_subcommand("eval", "Score predicted masks against a corpus");
  ev->add_option("--pred", pred_dir, "Directory with <case>/mask.pgm")->required();
  ev->add_option("--gt", gt_dir, "Directory with <case>/gt.pgm")->required();
  ev->add_option("--out,--output-dir", eval_out, "Write eval.csv / eval.json / variance.csv here");

  std::string sw_prior, sw_gt, sw_out;
  std::vector<double> grid;
  CLI::App* sw = app.add_subcommand("sweep", "Dice of the thresholded prior over a grid");
  sw->add_option("--prior", sw_prior, "Prior probability FMAP")->required();
  sw->add_option("--gt", sw_gt, "Ground-truth mask PGM")->required();
  sw->add_option("--grid", grid, "Ascending thresholds in [0, 1)")->delimiter(',');
  sw->add_option("--out", sw_out, "CSV output file (default stdout)");

  std::string abl_corpus;
  CLI::App* abl = app.add_subcommand("ablate", "Run the five ablation configurations");
  abl->add_option("--corpus", abl_corpus, "Corpus directory")->required();
  abl_flags.attach(abl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorCode::Usage);
  }

  try {
    if (*seg) return run_segment_cmd(seg_flags, image, prior, gt, corpus);
    if (*syn) return run_synth_cmd(spec_path, count, synth_out, synth_seed);
    if (*ev) return run_eval_cmd(pred_dir, gt_dir, eval_out);
    if (*sw) return run_sweep_cmd(sw_prior, sw_gt, grid, sw_out);
    if (*abl) return run_ablate_cmd(abl_flags, abl_corpus);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(ErrorCode::Io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
