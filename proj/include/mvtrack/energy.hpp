#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "mvtrack/geometry.hpp"
#include "mvtrack/image.hpp"
#include "mvtrack/renderer.hpp"

namespace mvtrack {

/// How each band sample's Jacobian enters the gradient accumulator.
/// kUnit: g += J^T (literal normal-equation form). kEnergyWeighted: g += J^T F.
enum class ResidualMode { kUnit, kEnergyWeighted };

struct EnergyConfig {
  double heaviside_slope = 1.2;   // px^-1
  double band_halfwidth = 8.0;    // px at 640 px width; see band_for_width
  int hist_bins = 32;             // per channel
  double alpha_fg = 0.1;
  double alpha_bg = 0.2;
  double probability_floor = 1e-6;
  int stride = 1;
  ResidualMode residual = ResidualMode::kUnit;

  /// Throws InvalidArgument. Besides the per-field ranges, requires
  /// floor * bins^3 < 1 so the floor can be met by mixing in a uniform.
  void validate() const;
  /// Band half-width scaled linearly with image width (reference 640 px).
  double band_for_width(int width) const { return band_halfwidth * width / 640.0; }
};

/// Joint RGB foreground/background histograms (bins^3 cells each), each
/// normalized to 1 with every cell at least `floor`.
class ColorModel {
 public:
  ColorModel() = default;
  ColorModel(int bins, std::vector<double> fg, std::vector<double> bg);

  int bins() const { return bins_; }
  const std::vector<double>& fg() const { return fg_; }
  const std::vector<double>& bg() const { return bg_; }
  bool empty() const { return fg_.empty(); }

  std::size_t bin_index(std::array<std::uint8_t, 3> rgb) const;
  double fg_likelihood(std::array<std::uint8_t, 3> rgb) const { return fg_[bin_index(rgb)]; }
  double bg_likelihood(std::array<std::uint8_t, 3> rgb) const { return bg_[bin_index(rgb)]; }

  /// Pairwise-normalized posteriors (P_f, P_b), summing to 1.
  std::pair<double, double> posteriors(std::array<std::uint8_t, 3> rgb) const;

  bool operator==(const ColorModel&) const = default;

 private:
  int bins_ = 0;
  std::vector<double> fg_;
  std::vector<double> bg_;
};

/// H_e(phi) = 1/2 + atan(s phi) / pi.
double smoothed_heaviside(double phi, double slope);
/// dH_e/dphi = (s / pi) / (1 + (s phi)^2).
double smoothed_heaviside_derivative(double phi, double slope);

/// -log(H_e(phi) P_f + (1 - H_e(phi)) P_b), probabilities floored at `floor`.
double pixel_energy(double phi, double p_fg, double p_bg, double slope, double floor);

/// Bilinear interpolation of phi; coordinates are clamped to the image.
double interpolate_phi(const LevelSetField& levelset, double x, double y);

/// Gradient of the bilinear interpolant of phi. At integer coordinates the
/// two adjacent cells are averaged, which reduces to a central difference.
/// Returns nullopt within one pixel of the image border.
std::optional<Row2> phi_gradient(const LevelSetField& levelset, double x, double y);

/// dF/dx at image position (x, y):
/// -(P_f - P_b) H_e'(phi) / (H_e P_f + (1 - H_e) P_b) * grad phi.
/// nullopt for border samples.
std::optional<Row2> pixel_gradient(const LevelSetField& levelset, double x, double y, double p_fg, double p_bg,
                                   double slope, double floor);

/// Foreground histogram from band pixels with phi > 0, background from band
/// pixels with phi < 0. With `prev`, blends (1 - alpha) prev + alpha current
/// per histogram. Throws DegenerateRegion when either region is empty.
ColorModel build_color_model(const RgbImage& image, const LevelSetField& levelset, const ColorModel* prev,
                             const EnergyConfig& cfg);

/// Per-view input to the solver: image, template distance field, color model
/// and contour-band samples with their cached posteriors. `anchors` are the
/// projections of each sample's model point at the pose that produced the
/// distance field.
struct ViewObservation {
  const RgbImage* image = nullptr;
  LevelSetField levelset;
  ColorModel color;
  SampleSet samples;
  std::vector<double> p_fg;
  std::vector<double> p_bg;
  std::vector<Vec2> anchors;
};

using FrameObservation = std::vector<ViewObservation>;

}  // namespace mvtrack
