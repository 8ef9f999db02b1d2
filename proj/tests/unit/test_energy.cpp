#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mvtrack/energy.hpp"
#include "mvtrack/errors.hpp"
#include "mvtrack/renderer.hpp"

using namespace mvtrack;

namespace {

LevelSetField disc_levelset(int w, int h, double cx, double cy, double r) {
  SilhouetteMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (std::hypot(x - cx, y - cy) < r) m.occupancy[y * w + x] = 1;
  return signed_distance(m);
}

// Red disc on blue background, matching `disc_levelset`.
RgbImage disc_image(int w, int h, double cx, double cy, double r) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set(x, y, std::hypot(x - cx, y - cy) < r ? std::array<std::uint8_t, 3>{220, 10, 10}
                                                   : std::array<std::uint8_t, 3>{10, 10, 220});
  return img;
}

}  // namespace

TEST(Heaviside, Values) {
  EXPECT_EQ(smoothed_heaviside(0.0, 1.2), 0.5);
  EXPECT_DOUBLE_EQ(smoothed_heaviside(10.0, 1.2), 0.5 + std::atan(12.0) / kPi);
  for (double phi : {-7.0, -0.3, 0.1, 2.5, 40.0}) {
    EXPECT_NEAR(smoothed_heaviside(-phi, 1.2), 1.0 - smoothed_heaviside(phi, 1.2), 1e-15);
    const double h = smoothed_heaviside(phi, 1.2);
    EXPECT_GT(h, 0.0);
    EXPECT_LT(h, 1.0);
  }
}

TEST(Heaviside, DerivativeMatchesDifferences) {
  for (double phi : {-5.0, -0.5, 0.0, 0.7, 3.0}) {
    const double eps = 1e-6;
    const double fd = (smoothed_heaviside(phi + eps, 1.2) - smoothed_heaviside(phi - eps, 1.2)) / (2 * eps);
    EXPECT_NEAR(smoothed_heaviside_derivative(phi, 1.2), fd, 1e-8);
  }
}

TEST(PixelEnergy, Cases) {
  for (double phi : {-10.0, 0.0, 3.0}) EXPECT_NEAR(pixel_energy(phi, 0.3, 0.3, 1.2, 1e-6), -std::log(0.3), 1e-15);
  EXPECT_NEAR(pixel_energy(1e9, 0.7, 0.2, 1.2, 1e-6), -std::log(0.7), 1e-9);
  EXPECT_NEAR(pixel_energy(0.0, 0.8, 0.2, 1.2, 1e-6), -std::log(0.5), 1e-15);
  EXPECT_TRUE(std::isfinite(pixel_energy(100.0, 0.0, 1.0, 1.2, 1e-6)));
}

TEST(ColorModel, UniformRegionsCountingOracle) {
  const int w = 64, h = 48;
  const LevelSetField ls = disc_levelset(w, h, 32, 24, 12);
  const RgbImage img = disc_image(w, h, 32, 24, 12);
  EnergyConfig cfg;
  const ColorModel m = build_color_model(img, ls, nullptr, cfg);
  const double eps = cfg.probability_floor;
  const double cells = std::pow(cfg.hist_bins, 3);
  const std::array<std::uint8_t, 3> red{220, 10, 10}, blue{10, 10, 220};
  EXPECT_NEAR(m.fg_likelihood(red), 1.0 - eps * (cells - 1), 1e-12);
  EXPECT_NEAR(m.bg_likelihood(red), eps, 1e-15);
  EXPECT_NEAR(m.bg_likelihood(blue), 1.0 - eps * (cells - 1), 1e-12);
  EXPECT_NEAR(std::accumulate(m.fg().begin(), m.fg().end(), 0.0), 1.0, 1e-9);
  EXPECT_NEAR(std::accumulate(m.bg().begin(), m.bg().end(), 0.0), 1.0, 1e-9);
  for (double v : m.fg()) EXPECT_GE(v, eps * (1 - 1e-12));
  const auto [pf, pb] = m.posteriors(red);
  EXPECT_NEAR(pf + pb, 1.0, 1e-15);
  EXPECT_GT(pf, 0.99);
}

TEST(ColorModel, UpdateFixedPointAndFullReplacement) {
  const int w = 64, h = 48;
  const LevelSetField ls = disc_levelset(w, h, 30, 20, 10);
  const RgbImage img = disc_image(w, h, 30, 20, 10);
  EnergyConfig cfg;
  const ColorModel cur = build_color_model(img, ls, nullptr, cfg);
  const ColorModel same = build_color_model(img, ls, &cur, cfg);
  for (std::size_t i = 0; i < cur.fg().size(); ++i) {
    EXPECT_NEAR(same.fg()[i], cur.fg()[i], 1e-12);
    EXPECT_NEAR(same.bg()[i], cur.bg()[i], 1e-12);
  }
  // A different previous model is fully replaced when alpha = 1.
  const RgbImage other = disc_image(w, h, 20, 30, 8);
  const ColorModel prev = build_color_model(other, disc_levelset(w, h, 40, 20, 6), nullptr, cfg);
  EnergyConfig full = cfg;
  full.alpha_fg = full.alpha_bg = 1.0;
  const ColorModel replaced = build_color_model(img, ls, &prev, full);
  for (std::size_t i = 0; i < cur.fg().size(); ++i) EXPECT_NEAR(replaced.fg()[i], cur.fg()[i], 1e-12);
}

TEST(ColorModel, DegenerateRegionsThrow) {
  SilhouetteMask empty(20, 20);
  RgbImage img(20, 20);
  EXPECT_THROW(build_color_model(img, signed_distance(empty), nullptr, EnergyConfig{}), DegenerateRegion);
}

TEST(EnergyConfig, Validation) {
  EnergyConfig c;
  EXPECT_NO_THROW(c.validate());
  c.hist_bins = 20;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = EnergyConfig{};
  c.probability_floor = 1e-3;
  c.hist_bins = 64;
  EXPECT_THROW(c.validate(), InvalidArgument);  // floor * bins^3 >= 1
  c = EnergyConfig{};
  c.heaviside_slope = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_DOUBLE_EQ(EnergyConfig{}.band_for_width(1280), 16.0);
}

TEST(PhiGradient, BilinearAndCentralDifference) {
  LevelSetField ls;
  ls.width = 5;
  ls.height = 5;
  ls.phi.resize(25);
  ls.nearest_contour.assign(25, 0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) ls.phi[y * 5 + x] = 2.0 * x - 3.0 * y + 0.5 * x * y;
  // Integer position: central difference.
  const auto g = phi_gradient(ls, 2.0, 2.0);
  ASSERT_TRUE(g);
  EXPECT_DOUBLE_EQ((*g)(0), 0.5 * (ls.at(3, 2) - ls.at(1, 2)));
  EXPECT_DOUBLE_EQ((*g)(1), 0.5 * (ls.at(2, 3) - ls.at(2, 1)));
  // Interior of a cell: derivative of the bilinear interpolant.
  const double x = 2.3, y = 1.6, e = 1e-7;
  const auto h = phi_gradient(ls, x, y);
  ASSERT_TRUE(h);
  EXPECT_NEAR((*h)(0), (interpolate_phi(ls, x + e, y) - interpolate_phi(ls, x - e, y)) / (2 * e), 1e-7);
  EXPECT_NEAR((*h)(1), (interpolate_phi(ls, x, y + e) - interpolate_phi(ls, x, y - e)) / (2 * e), 1e-7);
  EXPECT_FALSE(phi_gradient(ls, 0.5, 2.0));
  EXPECT_FALSE(phi_gradient(ls, 2.0, 3.5));
}

TEST(PixelGradient, ZeroCases) {
  const LevelSetField ls = disc_levelset(40, 40, 20, 20, 8);
  const auto g = pixel_gradient(ls, 27.3, 20.2, 0.4, 0.4, 1.2, 1e-6);
  ASSERT_TRUE(g);
  EXPECT_EQ((*g)(0), 0.0);
  EXPECT_EQ((*g)(1), 0.0);

  LevelSetField flat;
  flat.width = flat.height = 6;
  flat.phi.assign(36, 1.5);
  flat.nearest_contour.assign(36, 0);
  const auto z = pixel_gradient(flat, 2.5, 2.5, 0.9, 0.1, 1.2, 1e-6);
  ASSERT_TRUE(z);
  EXPECT_EQ(z->norm(), 0.0);
}

TEST(PixelGradient, MatchesFiniteDifferencesOffCellBoundaries) {
  const LevelSetField ls = disc_levelset(80, 60, 40.3, 29.7, 17.2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(10, 70), uy(8, 52), up(0.02, 0.98);
  const double slope = 1.2, floor = 1e-6, e = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const double x = ux(rng), y = uy(rng), pf = up(rng), pb = up(rng);
    // Keep the stencil inside one bilinear cell.
    if (x - std::floor(x) < 2 * e || std::ceil(x) - x < 2 * e || y - std::floor(y) < 2 * e ||
        std::ceil(y) - y < 2 * e)
      continue;
    const auto g = pixel_gradient(ls, x, y, pf, pb, slope, floor);
    ASSERT_TRUE(g);
    auto f = [&](double px, double py) { return pixel_energy(interpolate_phi(ls, px, py), pf, pb, slope, floor); };
    const double fx = (f(x + e, y) - f(x - e, y)) / (2 * e);
    const double fy = (f(x, y + e) - f(x, y - e)) / (2 * e);
    const double scale = std::max({1e-6, std::abs(fx), std::abs(fy)});
    EXPECT_LT(std::abs((*g)(0) - fx) / scale, 1e-3) << x << "," << y;
    EXPECT_LT(std::abs((*g)(1) - fy) / scale, 1e-3) << x << "," << y;
    ++checked;
  }
  EXPECT_GT(checked, 250);
}
