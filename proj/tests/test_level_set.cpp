#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "mcls/level_set.hpp"
#include "mcls/metrics.hpp"
#include "mcls/synth.hpp"

using namespace mcls;

namespace {

constexpr double kPi = std::numbers::pi;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mcls::Error");
  return ErrorCode::Usage;
}

Plane<double> random_plane(int rows, int cols, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Plane<double> p(rows, cols);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

FeatureStack<double> constant_stack(int rows, int cols, double v) {
  FeatureStack<double> f;
  for (auto& ch : f.channels) ch = Plane<double>::Constant(rows, cols, v);
  return f;
}

// Signed distance to a circle, positive inside.
Plane<double> disk_sdf(int n, double cr, double cc, double radius) {
  Plane<double> p(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) p(r, c) = radius - std::hypot(r - cr, c - cc);
  }
  return p;
}

// Direct reflected 2D Gaussian convolution followed by central differences.
Plane<double> edge_oracle(const Plane<double>& img, double sigma) {
  const int rows = static_cast<int>(img.rows()), cols = static_cast<int>(img.cols());
  const int rad = static_cast<int>(std::ceil(4 * sigma));
  auto refl = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
    return i;
  };
  double norm = 0;
  for (int a = -rad; a <= rad; ++a) {
    for (int b = -rad; b <= rad; ++b) norm += std::exp(-(a * a + b * b) / (2 * sigma * sigma));
  }
  Plane<double> s(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0;
      for (int a = -rad; a <= rad; ++a) {
        for (int b = -rad; b <= rad; ++b) {
          acc += std::exp(-(a * a + b * b) / (2 * sigma * sigma)) * img(refl(r + a, rows), refl(c + b, cols));
        }
      }
      s(r, c) = acc / norm;
    }
  }
  Plane<double> g(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double dr = r == 0 ? s(1, c) - s(0, c)
                        : r == rows - 1 ? s(r, c) - s(r - 1, c)
                                        : (s(r + 1, c) - s(r - 1, c)) / 2;
      const double dc = c == 0 ? s(r, 1) - s(r, 0)
                        : c == cols - 1 ? s(r, c) - s(r, c - 1)
                                        : (s(r, c + 1) - s(r, c - 1)) / 2;
      g(r, c) = 1 / (1 + std::hypot(dr, dc));
    }
  }
  return g;
}

}  // namespace

TEST_CASE("smoothed Heaviside and Dirac identities") {
  const double tau = 0.01;
  CHECK(std::abs(heaviside(0.0, tau) - 0.5) <= 1e-12);
  CHECK(std::abs(heaviside(tau, tau) - 0.75) <= 1e-12);
  CHECK(std::abs(heaviside(-tau, tau) - 0.25) <= 1e-12);
  CHECK(std::abs(dirac(0.0, tau) - 1 / (kPi * tau)) <= 1e-12);
  CHECK(heaviside(1e6 * tau, tau) > 0.999999);
  CHECK(heaviside(-1e6 * tau, tau) < 0.000001);
  for (double v : {-3.0, -0.1, 0.0, 0.004, 2.5}) {
    CHECK(std::abs(heaviside(v, tau) + heaviside(-v, tau) - 1) <= 1e-12);
    CHECK(dirac(v, tau) == doctest::Approx(dirac(-v, tau)).epsilon(1e-15));
  }
}

TEST_CASE("Dirac is the derivative of the Heaviside") {
  for (double tau : {0.01, 1.0}) {
    const double h = 1e-6 * tau;
    for (double v : {-5 * tau, -tau, 0.0, 0.3 * tau, 7 * tau}) {
      const double fd = (heaviside(v + h, tau) - heaviside(v - h, tau)) / (2 * h);
      CHECK(std::abs(fd - dirac(v, tau)) <= 1e-4 * dirac(v, tau));
    }
  }
}

TEST_CASE("Dirac integrates to nearly one") {
  const double tau = 0.01;
  const int n = 20000;
  const double a = -100 * tau, b = 100 * tau, h = (b - a) / n;
  double s = dirac(a, tau) + dirac(b, tau);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * dirac(a + i * h, tau);
  const double integral = s * h / 3;
  CHECK(integral >= 0.99);
  CHECK(integral <= 1.0);
}

TEST_CASE("plane overloads agree with the scalar forms") {
  const Plane<double> v = random_plane(4, 5, 3, -0.05, 0.05);
  const Plane<double> h = heaviside(v, 0.01), d = dirac(v, 0.01);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    CHECK(h.data()[i] == heaviside(v.data()[i], 0.01));
    CHECK(d.data()[i] == doctest::Approx(dirac(v.data()[i], 0.01)).epsilon(1e-14));
  }
}

TEST_CASE("edge indicator") {
  SUBCASE("constant image gives one") {
    const Plane<double> g = edge_indicator<double>(Plane<double>::Constant(20, 20, 37.0), 3.0);
    CHECK((g - 1).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("step edge matches a direct convolution and dips below 0.2") {
    Plane<double> img = Plane<double>::Zero(24, 30);
    img.rightCols(15).setConstant(100.0);
    const Plane<double> g = edge_indicator<double>(img, 3.0);
    const Plane<double> oracle = edge_oracle(img, 3.0);
    CHECK((g - oracle).abs().maxCoeff() <= 1e-10);
    CHECK(g(12, 14) < 0.2);
    CHECK(g(12, 15) < 0.2);
    CHECK(g(12, 0) > 0.9);
  }
  SUBCASE("adding a constant changes nothing") {
    const Plane<double> img = random_plane(16, 16, 9, 0, 255);
    const Plane<double> a = edge_indicator<double>(img, 2.0);
    const Plane<double> b = edge_indicator<double>((img + 500).eval(), 2.0);
    CHECK((a - b).abs().maxCoeff() <= 1e-9);
  }
  SUBCASE("literal variant uses the smoothed intensity") {
    const Plane<double> g = edge_indicator<double>(Plane<double>::Constant(8, 8, 4.0), 1.0, true);
    CHECK((g - 0.2).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("rejects a non-positive sigma") {
    CHECK(code_of([] { edge_indicator<double>(Plane<double>::Zero(8, 8), 0.0); }) ==
          ErrorCode::InvalidArgument);
  }
}

TEST_CASE("initialization from the prior") {
  SUBCASE("a binary prior reproduces the mask") {
    const SyntheticCase cs = make_synthetic_case(canonical_disk_spec(4));
    const PhiInit<double> init = init_phi_from_prior<double>(mask_to_plane<double>(cs.gt), 0.5, 2.0);
    CHECK(!init.empty_background);
    CHECK((threshold_mask(init.phi, 0.0) == cs.gt).all());
    CHECK((init.phi.abs() == 2.0).all());
  }
  SUBCASE("threshold zero on a positive map leaves no background") {
    const PhiInit<double> init = init_phi_from_prior<double>(Plane<double>::Constant(6, 6, 0.2), 0.0, 1.0);
    CHECK(init.empty_background);
  }
  SUBCASE("blurred disk keeps its radius at the half threshold") {
    SynthCaseSpec s = canonical_disk_spec(1);
    s.corruption_radius = 0;
    s.noise_sigma = 0;
    const SyntheticCase cs = make_synthetic_case(s);
    const PhiInit<double> init = init_phi_from_prior<double>(cs.prior, 0.5, 2.0);
    const double area = static_cast<double>((init.phi > 0).count());
    const double radius = std::sqrt(area / kPi);
    CHECK(radius >= 28.0);
    CHECK(radius <= 32.0);
  }
  SUBCASE("nothing above the threshold collapses") {
    CHECK(code_of([] { init_phi_from_prior<double>(Plane<double>::Constant(6, 6, 0.3), 0.5, 2.0); }) ==
          ErrorCode::Collapse);
  }
  SUBCASE("bad arguments") {
    const Plane<double> p = Plane<double>::Constant(6, 6, 0.9);
    CHECK(code_of([&] { init_phi_from_prior<double>(p, 1.0, 2.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { init_phi_from_prior<double>(p, -0.1, 2.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { init_phi_from_prior<double>(p, 0.5, 0.0); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("circle initialization") {
  const LevelSetField<double> phi = init_phi_circle<double>(64, 64, 31.5, 31.5, 10.0, 2.0);
  BinaryMask disk(64, 64);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) disk(r, c) = (r - 31.5) * (r - 31.5) + (c - 31.5) * (c - 31.5) <= 100.0;
  }
  CHECK(overlap(threshold_mask(phi, 0.0), disk).dice == 1.0);
  CHECK((phi == init_phi_circle<double>(64, 64, 31.5, 31.5, 10.0, 2.0)).all());
  const LevelSetField<double> centered = init_phi_center_circle<double>(40, 80, 2.0);
  CHECK(std::abs(std::sqrt((centered > 0).count() / kPi) - 10.0) < 1.0);
  CHECK(code_of([] { init_phi_circle<double>(64, 64, 31.5, 31.5, 0.0, 2.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { init_phi_circle<double>(64, 64, 5.0, 31.5, 10.0, 2.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("region statistics") {
  SUBCASE("two-valued example") {
    FeatureStack<double> f = constant_stack(1, 4, 0.0);
    f[0] << 10, 20, 30, 40;
    Plane<double> phi(1, 4);
    phi << 1e12, 1e12, -1e12, -1e12;
    const RegionStats<double> s = region_stats<double>(f, phi, 0.01, 1e-2);
    CHECK(s.mean(0, 0) == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(s.mean(1, 0) == doctest::Approx(35.0).epsilon(1e-9));
    CHECK(s.sigma(0, 0) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(s.sigma(1, 0) == doctest::Approx(5.0).epsilon(1e-6));
  }
  SUBCASE("constant features hit the sigma floor") {
    const FeatureStack<double> f = constant_stack(5, 5, 42.0);
    const Plane<double> phi = random_plane(5, 5, 2, -1, 1);
    const RegionStats<double> s = region_stats<double>(f, phi, 0.01, 1e-2);
    CHECK((s.sigma == 1e-2).all());
    CHECK(((s.mean - 42.0).abs() <= 1e-12).all());
  }
  SUBCASE("flipping phi swaps the regions") {
    FeatureStack<double> f;
    for (int j = 0; j < kFeatureChannels; ++j) f[j] = random_plane(9, 7, 10 + j, 0, 255);
    const Plane<double> phi = random_plane(9, 7, 30, -0.05, 0.05);
    const RegionStats<double> a = region_stats<double>(f, phi, 0.01, 1e-2);
    const RegionStats<double> b = region_stats<double>(f, (-phi).eval(), 0.01, 1e-2);
    CHECK(((a.mean.row(0) - b.mean.row(1)).abs() <= 1e-9).all());
    CHECK(((a.sigma.row(1) - b.sigma.row(0)).abs() <= 1e-9).all());
  }
  SUBCASE("brute-force weighted accumulation") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      FeatureStack<double> f;
      for (int j = 0; j < kFeatureChannels; ++j) f[j] = random_plane(13, 11, seed * 100 + j, 0, 255);
      const Plane<double> phi = random_plane(13, 11, seed * 100 + 50, -0.1, 0.1);
      const double tau = 0.01;
      const RegionStats<double> s = region_stats<double>(f, phi, tau, 1e-2);
      for (int j = 0; j < kFeatureChannels; ++j) {
        double w1 = 0, w2 = 0, a1 = 0, a2 = 0;
        for (Eigen::Index i = 0; i < phi.size(); ++i) {
          const double h = 0.5 * (1 + 2 / kPi * std::atan(phi.data()[i] / tau));
          w1 += h;
          w2 += 1 - h;
          a1 += h * f[j].data()[i];
          a2 += (1 - h) * f[j].data()[i];
        }
        const double m1 = a1 / w1, m2 = a2 / w2;
        double v1 = 0, v2 = 0;
        for (Eigen::Index i = 0; i < phi.size(); ++i) {
          const double h = 0.5 * (1 + 2 / kPi * std::atan(phi.data()[i] / tau));
          const double x = f[j].data()[i];
          v1 += h * (x - m1) * (x - m1);
          v2 += (1 - h) * (x - m2) * (x - m2);
        }
        CHECK(std::abs(s.mean(0, j) - m1) <= 1e-9);
        CHECK(std::abs(s.mean(1, j) - m2) <= 1e-9);
        CHECK(std::abs(s.sigma(0, j) - std::max(std::sqrt(v1 / w1), 1e-2)) <= 1e-9);
        CHECK(std::abs(s.sigma(1, j) - std::max(std::sqrt(v2 / w2), 1e-2)) <= 1e-9);
      }
    }
  }
  SUBCASE("an empty region collapses") {
    const FeatureStack<double> f = constant_stack(4, 4, 1.0);
    CHECK(code_of([&] { region_stats<double>(f, Plane<double>::Constant(4, 4, 1e9), 0.01, 1e-2); }) ==
          ErrorCode::Collapse);
  }
}

TEST_CASE("log-likelihood ratio") {
  const std::array<double, kFeatureChannels> ones{1, 1, 1, 1, 1};
  const std::array<bool, kFeatureChannels> all{true, true, true, true, true};
  RegionStats<double> s;
  s.mean.setConstant(100);
  s.sigma.setConstant(10);

  SUBCASE("identical regions give zero") {
    FeatureStack<double> f;
    for (int j = 0; j < kFeatureChannels; ++j) f[j] = random_plane(3, 3, 70 + j, 0, 255);
    CHECK(log_likelihood_ratio<double>(f, s, ones, all).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("single channel example") {
    s.mean(0, 0) = 0;
    s.mean(1, 0) = 10;
    s.sigma(0, 0) = s.sigma(1, 0) = 5;
    const FeatureStack<double> f = constant_stack(2, 2, 0.0);
    const std::array<bool, kFeatureChannels> gray{true, false, false, false, false};
    // (0 - 10)^2 / (2 * 25) = 2
    CHECK((log_likelihood_ratio<double>(f, s, ones, gray) - 2.0).abs().maxCoeff() <= 1e-12);
    const std::array<double, kFeatureChannels> half{0.5, 1, 1, 1, 1};
    CHECK((log_likelihood_ratio<double>(f, s, half, gray) - 1.0).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("matches the Gaussian log densities and clamps") {
    s.mean(0, 2) = 40;
    s.sigma(0, 2) = 3;
    s.mean(1, 2) = 60;
    s.sigma(1, 2) = 30;
    const std::array<bool, kFeatureChannels> one{false, false, true, false, false};
    FeatureStack<double> f = constant_stack(1, 3, 0.0);
    f[2] << 200, 50, 0;
    const Plane<double> l = log_likelihood_ratio<double>(f, s, ones, one);
    CHECK(l(0, 0) == -50.0);
    const double expect = gaussian_log_density(50.0, 40.0, 3.0) - gaussian_log_density(50.0, 60.0, 30.0);
    CHECK(std::abs(expect) < 50);
    CHECK(std::abs(l(0, 1) - expect) <= 1e-9);
    CHECK(l(0, 2) == -50.0);
  }
  SUBCASE("swapping the regions negates the ratio") {
    s.mean.row(0) << 10, 60, 90, 150, 220;
    s.sigma.row(0) << 5, 9, 14, 20, 30;
    s.mean.row(1) << 30, 80, 70, 160, 200;
    s.sigma.row(1) << 7, 11, 12, 25, 35;
    RegionStats<double> t;
    t.mean.row(0) = s.mean.row(1);
    t.mean.row(1) = s.mean.row(0);
    t.sigma.row(0) = s.sigma.row(1);
    t.sigma.row(1) = s.sigma.row(0);
    FeatureStack<double> f;
    for (int j = 0; j < kFeatureChannels; ++j) f[j] = random_plane(6, 6, 90 + j, 0, 255);
    const Plane<double> a = log_likelihood_ratio<double>(f, s, ones, all);
    const Plane<double> b = log_likelihood_ratio<double>(f, t, ones, all);
    CHECK((a + b).abs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("energy terms") {
  LevelSetConfig<double> cfg;
  const int n = 24;
  Plane<double> phi(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) phi(r, c) = c - 11.5;
  }
  const FeatureStack<double> f = constant_stack(n, n, 10.0);
  const RegionStats<double> s = region_stats<double>(f, phi, cfg.tau, cfg.sigma_floor);
  const Plane<double> g = Plane<double>::Ones(n, n);

  SUBCASE("a signed distance function has no regularization energy") {
    cfg.mu = 0;
    cfg.omega = {0, 0, 0, 0, 0};
    CHECK(std::abs(energy<double>(phi, f, s, g, cfg)) <= 1e-12);
    cfg.nu = 0;
    CHECK(energy<double>((phi * 3).eval(), f, s, g, cfg) == 0.0);
  }
  SUBCASE("length term measures the contour") {
    cfg.nu = 0;
    cfg.mu = 1;
    cfg.omega = {0, 0, 0, 0, 0};
    // straight vertical line of height n, smeared over the two columns next to it
    CHECK(energy<double>(phi, f, s, g, cfg) == doctest::Approx(double(n)).epsilon(1e-3));
  }
  SUBCASE("fitting term is the weighted negative log likelihood") {
    cfg.nu = 0;
    cfg.mu = 0;
    cfg.omega = {1, 0, 0, 0, 0};
    const double per_pixel = -gaussian_log_density(10.0, 10.0, cfg.sigma_floor);
    CHECK(energy<double>(phi, f, s, g, cfg) == doctest::Approx(per_pixel * n * n).epsilon(1e-9));
  }
}

TEST_CASE("evolution steps") {
  LevelSetConfig<double> cfg;
  const int n = 32;

  SUBCASE("all weights off leaves phi unchanged") {
    cfg.nu = 0;
    cfg.mu = 0;
    cfg.omega = {0, 0, 0, 0, 0};
    const Plane<double> phi = random_plane(n, n, 5, -2, 2);
    FeatureStack<double> f;
    for (int j = 0; j < kFeatureChannels; ++j) f[j] = random_plane(n, n, 6 + j, 0, 255);
    const RegionStats<double> s = region_stats<double>(f, phi, cfg.tau, cfg.sigma_floor);
    const Plane<double> next = evolve_step<double>(phi, f, s, Plane<double>::Ones(n, n), cfg);
    CHECK((next == phi).all());
  }
  SUBCASE("regularization alone keeps a planar distance function") {
    cfg.mu = 0;
    cfg.omega = {0, 0, 0, 0, 0};
    Plane<double> phi(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) phi(r, c) = 0.6 * (r - 15.2) + 0.8 * (c - 14.7);
    }
    const FeatureStack<double> f = constant_stack(n, n, 1.0);
    const RegionStats<double> s = region_stats<double>(f, phi, cfg.tau, cfg.sigma_floor);
    const Plane<double> next = evolve_step<double>(phi, f, s, Plane<double>::Ones(n, n), cfg);
    CHECK((next - phi).abs().maxCoeff() <= 1e-6);
  }
  SUBCASE("pure regularization barely moves a disk contour") {
    cfg.mu = 0;
    cfg.omega = {0, 0, 0, 0, 0};
    cfg.steps = 100;
    const int m = 64;
    const Plane<double> phi = disk_sdf(m, 31.5, 31.5, 15);
    const FeatureStack<double> f = constant_stack(m, m, 1.0);
    const Segmentation<double> out = evolve<double>(f, Plane<double>::Ones(m, m), phi, cfg);
    const BinaryMask before = threshold_mask(phi, 0.0);
    CHECK((erode(before, 1.0) <= out.mask).all());
    CHECK((out.mask <= dilate(before, 1.0)).all());
  }
  SUBCASE("a runaway update is reported as divergence") {
    cfg.eta = 1e12;
    const SyntheticCase cs = make_synthetic_case(canonical_disk_spec(0));
    cfg.steps = 3;
    CHECK(code_of([&] { segment<double>(cs.image, cs.prior, cfg); }) == ErrorCode::Divergence);
  }
  SUBCASE("non-finite input is reported as divergence") {
    Plane<double> phi = disk_sdf(n, 15.5, 15.5, 6);
    FeatureStack<double> f = constant_stack(n, n, 1.0);
    const RegionStats<double> s = region_stats<double>(f, phi, cfg.tau, cfg.sigma_floor);
    phi(3, 3) = std::numeric_limits<double>::quiet_NaN();
    CHECK(code_of([&] { evolve_step<double>(phi, f, s, Plane<double>::Ones(n, n), cfg); }) ==
          ErrorCode::Divergence);
  }
}

TEST_CASE("evolution improves an eroded prior on the canonical case") {
  const SyntheticCase cs = make_synthetic_case(canonical_disk_spec(0));
  LevelSetConfig<double> cfg;
  const Segmentation<double> out = segment<double>(cs.image, cs.prior, cfg);
  const double before = overlap(threshold_mask(cs.prior, 0.5), cs.gt).dice;
  const double after = overlap(out.mask, cs.gt).dice;
  CHECK(after > before);
  CHECK(out.diagnostics.iterations == cfg.steps);
  CHECK(out.diagnostics.energy.size() == static_cast<std::size_t>(cfg.steps));
  CHECK(out.diagnostics.area.back() == static_cast<long>((out.phi > 0).count()));
}

TEST_CASE("a noiseless disk with the exact prior is recovered") {
  SynthCaseSpec spec = canonical_disk_spec(0);
  spec.noise_sigma = 0;
  const SyntheticCase cs = make_synthetic_case(spec);
  LevelSetConfig<double> cfg;
  cfg.steps = 100;
  const Segmentation<double> out = segment<double>(cs.image, mask_to_plane<double>(cs.gt), cfg);
  CHECK(overlap(out.mask, cs.gt).dice == 1.0);
}

TEST_CASE("segmentation is deterministic") {
  const SyntheticCase cs = make_synthetic_case(canonical_disk_spec(2));
  LevelSetConfig<double> cfg;
  cfg.steps = 30;
  const Segmentation<double> a = segment<double>(cs.image, cs.prior, cfg);
  const Segmentation<double> b = segment<double>(cs.image, cs.prior, cfg);
  CHECK((a.phi == b.phi).all());
  CHECK(a.diagnostics.energy == b.diagnostics.energy);
}

TEST_CASE("default parameters") {
  const LevelSetConfig<double> cfg;
  CHECK(cfg.eta == 0.1);
  CHECK(cfg.nu == 0.01);
  CHECK(cfg.tau == 0.01);
  CHECK(cfg.sigma_edge == 3.0);
  CHECK(cfg.mu == doctest::Approx(65.025).epsilon(1e-15));
  CHECK(DiffusionParams<double>{}.p == 1.6);
}

TEST_CASE("configuration validation") {
  LevelSetConfig<double> cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = [](auto mutate) {
    LevelSetConfig<double> c;
    mutate(c);
    return code_of([&] { c.validate(); });
  };
  CHECK(bad([](auto& c) { c.eta = 0; }) == ErrorCode::InvalidArgument);
  CHECK(bad([](auto& c) { c.tau = -1; }) == ErrorCode::InvalidArgument);
  CHECK(bad([](auto& c) { c.omega[2] = -0.5; }) == ErrorCode::InvalidArgument);
  CHECK(bad([](auto& c) { c.steps = 0; }) == ErrorCode::InvalidArgument);
  CHECK(bad([](auto& c) { c.init_threshold = 1; }) == ErrorCode::InvalidArgument);
  CHECK(bad([](auto& c) { c.mu = std::numeric_limits<double>::quiet_NaN(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("energy does not rise over the first iterations on the canonical case") {
  const SyntheticCase cs = make_synthetic_case(canonical_disk_spec(0));
  LevelSetConfig<double> cfg;
  cfg.steps = 50;
  const auto& e = segment<double>(cs.image, cs.prior, cfg).diagnostics.energy;
  REQUIRE(e.size() == 50);
  // the explicit scheme may overshoot during the first few updates
  CHECK(e.back() < e.front());
  for (std::size_t n = 5; n + 1 < e.size(); ++n) {
    CAPTURE(n);
    CHECK(e[n + 1] <= e[n] + 1e-6 * std::abs(e[n]));
  }
}

TEST_CASE("one step does not move the contour away from the true edge") {
  const SyntheticCase cs = make_synthetic_case(canonical_disk_spec(0));
  // true edge pixels, and the mean distance of a mask's boundary pixels to them
  std::vector<std::pair<int, int>> edge;
  auto boundary = [](const BinaryMask& m, int r, int c) {
    if (!m(r, c)) return false;
    return r == 0 || c == 0 || r + 1 == m.rows() || c + 1 == m.cols() || !m(r - 1, c) || !m(r + 1, c) ||
           !m(r, c - 1) || !m(r, c + 1);
  };
  for (int r = 0; r < cs.gt.rows(); ++r) {
    for (int c = 0; c < cs.gt.cols(); ++c) {
      if (boundary(cs.gt, r, c)) edge.emplace_back(r, c);
    }
  }
  auto mean_distance = [&](const BinaryMask& m) {
    double sum = 0;
    int count = 0;
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) {
        if (!boundary(m, r, c)) continue;
        double best = 1e300;
        for (const auto& [er, ec] : edge) best = std::min(best, std::hypot(r - er, c - ec));
        sum += best;
        ++count;
      }
    }
    return sum / count;
  };
  LevelSetConfig<double> cfg;
  const BinaryMask before = threshold_mask(cs.prior, 0.5);
  for (int steps : {1, 300}) {
    cfg.steps = steps;
    const BinaryMask after = segment<double>(cs.image, cs.prior, cfg).mask;
    CAPTURE(steps);
    CHECK(mean_distance(after) <= mean_distance(before));
  }
}
