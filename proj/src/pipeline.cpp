#include "mcls/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "mcls/io.hpp"

namespace mcls {

namespace {

const std::array<const char*, 29> kConfigKeys{
    "eta", "nu", "mu", "tau", "omega", "sigma-edge", "steps", "init-threshold",
    "init-amplitude", "channels", "sigma-floor", "stats-refresh", "literal-edge-indicator",
    "divergence-limit", "diffusion-tau", "diffusion-p", "diffusion-step-size", "diffusion-steps",
    "intensity-scale", "image", "prior", "gt", "output-dir", "no-position", "no-texture",
    "no-prior", "color-overlay", "seed", "version"};

}  // namespace

void to_json(nlohmann::json& j, const RunConfig& c) {
  const auto& ls = c.level_set;
  const auto& d = c.diffusion;
  j = nlohmann::json{{"eta", ls.eta},
                     {"nu", ls.nu},
                     {"mu", ls.mu},
                     {"tau", ls.tau},
                     {"omega", ls.omega},
                     {"sigma-edge", ls.sigma_edge},
                     {"steps", ls.steps},
                     {"init-threshold", ls.init_threshold},
                     {"init-amplitude", ls.init_amplitude},
                     {"channels", ls.channels},
                     {"sigma-floor", ls.sigma_floor},
                     {"stats-refresh", ls.stats_refresh},
                     {"literal-edge-indicator", ls.literal_edge_indicator},
                     {"divergence-limit", ls.divergence_limit},
                     {"diffusion-tau", d.tau},
                     {"diffusion-p", d.p},
                     {"diffusion-step-size", d.step_size},
                     {"diffusion-steps", d.steps},
                     {"intensity-scale", d.intensity_scale},
                     {"image", c.image},
                     {"prior", c.prior},
                     {"gt", c.gt},
                     {"output-dir", c.output_dir},
                     {"no-position", c.no_position},
                     {"no-texture", c.no_texture},
                     {"no-prior", c.no_prior},
                     {"color-overlay", c.color_overlay},
                     {"seed", c.seed},
                     {"version", 1}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
    }
  }
  try {
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    auto& ls = c.level_set;
    auto& d = c.diffusion;
    get("eta", ls.eta);
    get("nu", ls.nu);
    get("mu", ls.mu);
    get("tau", ls.tau);
    get("omega", ls.omega);
    get("sigma-edge", ls.sigma_edge);
    get("steps", ls.steps);
    get("init-threshold", ls.init_threshold);
    get("init-amplitude", ls.init_amplitude);
    get("channels", ls.channels);
    get("sigma-floor", ls.sigma_floor);
    get("stats-refresh", ls.stats_refresh);
    get("literal-edge-indicator", ls.literal_edge_indicator);
    get("divergence-limit", ls.divergence_limit);
    get("diffusion-tau", d.tau);
    get("diffusion-p", d.p);
    get("diffusion-step-size", d.step_size);
    get("diffusion-steps", d.steps);
    get("intensity-scale", d.intensity_scale);
    get("image", c.image);
    get("prior", c.prior);
    get("gt", c.gt);
    get("output-dir", c.output_dir);
    get("no-position", c.no_position);
    get("no-texture", c.no_texture);
    get("no-prior", c.no_prior);
    get("color-overlay", c.color_overlay);
    get("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
}

LevelSetConfig<double> effective_level_set(const RunConfig& config) {
  LevelSetConfig<double> ls = config.level_set;
  if (config.no_texture) ls.channels[1] = ls.channels[2] = ls.channels[3] = false;
  if (config.no_prior) ls.channels[4] = false;
  return ls;
}

SegmentOutcome run_segment(const GrayImage<double>& image, const ProbMap<double>& prior,
                           const RunConfig& config) {
  const LevelSetConfig<double> ls = effective_level_set(config);
  ls.validate();
  validate_gray(image);
  validate_prob(prior);
  require_same_shape(image, prior, "segment");
  SegmentOutcome out;
  std::optional<LevelSetField<double>> phi0;
  if (config.no_position) {
    phi0 = init_phi_center_circle<double>(image.rows(), image.cols(), ls.init_amplitude);
  } else {
    PhiInit<double> init = init_phi_from_prior(prior, ls.init_threshold, ls.init_amplitude);
    out.empty_background = init.empty_background;
    phi0 = std::move(init.phi);
  }
  out.seg = segment(image, prior, ls, config.diffusion, phi0);
  return out;
}

std::string diagnostics_csv(const EvolutionDiagnostics<double>& diag) {
  std::ostringstream out;
  out << "iteration,energy,max_abs_update,area\n";
  for (std::size_t i = 0; i < diag.energy.size(); ++i) {
    out << i + 1 << ',' << format_number(diag.energy[i]) << ','
        << format_number(diag.max_update[i]) << ',' << diag.area[i] << '\n';
  }
  return out.str();
}

GrayImage<double> overlay_levels(const BinaryMask& pred, const std::optional<BinaryMask>& gt) {
  if (!gt) return pred.cast<double>() * 255.0;
  require_same_shape(pred, *gt, "overlay");
  const auto p = pred.cast<int>();
  const auto g = gt->cast<int>();
  return ((p + g) == 2).select(255.0, ((p + g) == 1).select(128.0, GrayImage<double>::Zero(
                                                                       pred.rows(), pred.cols())));
}

void write_overlay_ppm(const BinaryMask& pred, const std::optional<BinaryMask>& gt,
                       const fs::path& path) {
  const BinaryMask truth = gt ? *gt : BinaryMask::Zero(pred.rows(), pred.cols());
  require_same_shape(pred, truth, "overlay");
  // Red marks the prediction, green the truth; both together read as yellow.
  const Plane<std::uint8_t> red = pred * std::uint8_t(255);
  const Plane<std::uint8_t> green = truth * std::uint8_t(255);
  write_ppm(red, green, Plane<std::uint8_t>::Zero(pred.rows(), pred.cols()), path);
}

void write_segment_outputs(const fs::path& dir, const SegmentOutcome& outcome,
                           const std::optional<BinaryMask>& gt, const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string());
  write_mask_pgm(outcome.seg.mask, dir / "mask.pgm");
  write_fmap(outcome.seg.phi, dir / "phi.fmap");
  write_text_atomic(dir / "diagnostics.csv", diagnostics_csv(outcome.seg.diagnostics));
  if (config.color_overlay) {
    write_overlay_ppm(outcome.seg.mask, gt, dir / "overlay.ppm");
  } else {
    write_pgm(overlay_levels(outcome.seg.mask, gt), dir / "overlay.pgm");
  }
  write_text_atomic(dir / "config.json", nlohmann::json(config).dump(2) + "\n");
}

std::string case_name(int index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "case_" + digits;
}

std::vector<std::string> write_corpus(const SynthCaseSpec& base, int count, const fs::path& dir) {
  if (count < 0) throw Error(ErrorCode::InvalidArgument, "synth: count must be non-negative");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create corpus directory " + dir.string());
  std::vector<std::string> names;
  nlohmann::json cases = nlohmann::json::array();
  for (int k = 0; k < count; ++k) {
    SynthCaseSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(k);
    const SyntheticCase sc = make_synthetic_case(spec);
    const std::string name = case_name(k);
    const fs::path case_dir = dir / name;
    fs::create_directories(case_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create case directory " + case_dir.string());
    write_pgm(sc.image, case_dir / "image.pgm");
    write_mask_pgm(sc.gt, case_dir / "gt.pgm");
    write_fmap(sc.prior, case_dir / "prior.fmap");
    write_text_atomic(case_dir / "spec.json", nlohmann::json(spec).dump(2) + "\n");
    names.push_back(name);
    cases.push_back({{"name", name}, {"seed", spec.seed}});
  }
  const nlohmann::json manifest{{"count", count}, {"base", base}, {"cases", cases}};
  write_text_atomic(dir / kManifest, manifest.dump(2) + "\n");
  return names;
}

std::vector<std::string> corpus_cases(const fs::path& dir) {
  const fs::path manifest = dir / kManifest;
  std::vector<std::string> names;
  if (fs::exists(manifest)) {
    const std::vector<unsigned char> bytes = read_bytes(manifest);
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded() || !j.contains("cases") || !j.at("cases").is_array()) {
      throw Error(ErrorCode::Parse, "malformed manifest " + manifest.string());
    }
    for (const auto& c : j.at("cases")) names.push_back(c.at("name").get<std::string>());
    return names;
  }
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

CorpusCase load_case(const fs::path& corpus_dir, const std::string& name) {
  const fs::path d = corpus_dir / name;
  return {name, read_pgm(d / "image.pgm"), read_mask_pgm(d / "gt.pgm"),
          read_prob_map(d / "prior.fmap")};
}

std::vector<NamedReport> segment_corpus(const fs::path& corpus_dir, const RunConfig& config,
                                        const fs::path& out_dir) {
  std::vector<NamedReport> rows;
  for (const std::string& name : corpus_cases(corpus_dir)) {
    const CorpusCase c = load_case(corpus_dir, name);
    const SegmentOutcome outcome = run_segment(c.image, c.prior, config);
    write_segment_outputs(out_dir / name, outcome, c.gt, config);
    rows.push_back({name, overlap(outcome.seg.mask, c.gt)});
  }
  return rows;
}

std::string variance_direction(double prior, double result) {
  if (result < prior) return "lower";
  if (result > prior) return "higher";
  return "equal";
}

std::string variance_csv(const std::vector<VarianceRow>& rows) {
  std::ostringstream out;
  out << "case,prior_variance,result_variance,direction\n";
  int lower = 0;
  for (const auto& r : rows) {
    out << r.name << ',' << format_number(r.prior) << ',' << format_number(r.result) << ','
        << r.direction << '\n';
    lower += r.direction == "lower";
  }
  out << "# lower," << lower << ",of," << rows.size() << '\n';
  return out.str();
}

EvalResult evaluate_dirs(const fs::path& pred_dir, const fs::path& gt_dir) {
  std::error_code ec;
  for (const fs::path& d : {pred_dir, gt_dir}) {
    if (!fs::is_directory(d, ec)) throw Error(ErrorCode::Io, "not a directory: " + d.string());
  }
  std::set<std::string> names;
  for (const fs::path& d : {pred_dir, gt_dir}) {
    for (const auto& entry : fs::directory_iterator(d)) {
      if (entry.is_directory()) names.insert(entry.path().filename().string());
    }
  }
  EvalResult result;
  for (const std::string& name : names) {
    const fs::path pred = pred_dir / name / "mask.pgm";
    const fs::path gt = gt_dir / name / "gt.pgm";
    bool complete = true;
    for (const fs::path& p : {pred, gt}) {
      if (!fs::exists(p)) {
        result.missing.push_back(p.string());
        complete = false;
      }
    }
    if (!complete) continue;
    const BinaryMask ps = read_mask_pgm(pred);
    result.rows.push_back({name, overlap(ps, read_mask_pgm(gt))});
    const fs::path prior_path = gt_dir / name / "prior.fmap";
    if (fs::exists(prior_path)) {
      const double vp = pixel_variance(read_prob_map(prior_path));
      const double vr = pixel_variance(ps);
      result.variance.push_back({name, vp, vr, variance_direction(vp, vr)});
    }
  }
  return result;
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::Full: return "full";
    case Ablation::NoPosition: return "no-position";
    case Ablation::NoTexture: return "no-texture";
    case Ablation::NoPrior: return "no-prior";
    case Ablation::NoPriorNoTexture: return "no-prior-no-texture";
  }
  return "unknown";
}

RunConfig with_ablation(RunConfig config, Ablation a) {
  config.no_position = a == Ablation::NoPosition;
  config.no_texture = a == Ablation::NoTexture || a == Ablation::NoPriorNoTexture;
  config.no_prior = a == Ablation::NoPrior || a == Ablation::NoPriorNoTexture;
  return config;
}

std::vector<AblationRow> run_ablation(const fs::path& corpus_dir, const RunConfig& config) {
  const std::vector<std::string> names = corpus_cases(corpus_dir);
  if (names.empty()) throw Error(ErrorCode::Io, "ablation: corpus is empty: " + corpus_dir.string());
  std::vector<CorpusCase> cases;
  for (const auto& name : names) cases.push_back(load_case(corpus_dir, name));
  std::vector<AblationRow> rows;
  for (Ablation a : kAblations) {
    const RunConfig variant = with_ablation(config, a);
    AblationRow row{a, {}, {}};
    std::vector<OverlapReport> reports;
    for (const CorpusCase& c : cases) {
      reports.push_back(overlap(run_segment(c.image, c.prior, variant).seg.mask, c.gt));
      row.dice.push_back(reports.back().dice);
    }
    row.summary = corpus_summary(reports);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "# population standard deviation\n";
  out << "configuration,max_dice,min_dice,mean_dice,std_dice,cases\n";
  for (const auto& r : rows) {
    out << to_string(r.ablation) << ',' << format_number(r.summary.max) << ','
        << format_number(r.summary.min) << ',' << format_number(r.summary.mean) << ','
        << format_number(r.summary.std) << ',' << r.dice.size() << '\n';
  }
  return out.str();
}

}  // namespace mcls
