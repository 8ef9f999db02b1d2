#include "mvtrack/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mvtrack/errors.hpp"

namespace mvtrack {
namespace {

int bin_shift(int bins) {
  switch (bins) {
    case 16: return 4;
    case 32: return 3;
    case 64: return 2;
    default: throw InvalidArgument("histogram bins must be 16, 32 or 64");
  }
}

// Normalizes `h` to 1 and mixes in a uniform so every cell reaches `floor`.
void normalize_with_floor(std::vector<double>& h, double floor) {
  const double total = std::accumulate(h.begin(), h.end(), 0.0);
  const double n = static_cast<double>(h.size());
  const double mix = floor * n;
  for (double& v : h) v = (1.0 - mix) * (v / total) + floor;
}

void renormalize(std::vector<double>& h) {
  const double total = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v /= total;
}

}  // namespace

void EnergyConfig::validate() const {
  if (!(heaviside_slope > 0.0)) throw InvalidArgument("energy: heaviside_slope must be > 0");
  if (!(band_halfwidth > 0.0)) throw InvalidArgument("energy: band_halfwidth must be > 0");
  bin_shift(hist_bins);
  if (!(probability_floor > 0.0 && probability_floor <= 1e-3))
    throw InvalidArgument("energy: probability_floor must be in (0, 1e-3]");
  if (probability_floor * std::pow(static_cast<double>(hist_bins), 3) >= 1.0)
    throw InvalidArgument("energy: probability_floor * hist_bins^3 must be < 1");
  if (!(alpha_fg >= 0.0 && alpha_fg <= 1.0) || !(alpha_bg >= 0.0 && alpha_bg <= 1.0))
    throw InvalidArgument("energy: learning rates must be in [0, 1]");
  if (stride < 1) throw InvalidArgument("energy: stride must be >= 1");
}

ColorModel::ColorModel(int bins, std::vector<double> fg, std::vector<double> bg)
    : bins_(bins), fg_(std::move(fg)), bg_(std::move(bg)) {
  bin_shift(bins);
  const std::size_t cells = static_cast<std::size_t>(bins) * bins * bins;
  if (fg_.size() != cells || bg_.size() != cells) throw InvalidArgument("color model: histogram size mismatch");
}

std::size_t ColorModel::bin_index(std::array<std::uint8_t, 3> rgb) const {
  const int s = bin_shift(bins_);
  return (static_cast<std::size_t>(rgb[0] >> s) * bins_ + (rgb[1] >> s)) * bins_ + (rgb[2] >> s);
}

std::pair<double, double> ColorModel::posteriors(std::array<std::uint8_t, 3> rgb) const {
  const std::size_t i = bin_index(rgb);
  const double f = fg_[i], b = bg_[i];
  return {f / (f + b), b / (f + b)};
}

double smoothed_heaviside(double phi, double slope) { return 0.5 + std::atan(slope * phi) / kPi; }

double smoothed_heaviside_derivative(double phi, double slope) {
  const double sp = slope * phi;
  return (slope / kPi) / (1.0 + sp * sp);
}

double pixel_energy(double phi, double p_fg, double p_bg, double slope, double floor) {
  const double pf = std::max(p_fg, floor);
  const double pb = std::max(p_bg, floor);
  const double he = smoothed_heaviside(phi, slope);
  return -std::log(he * pf + (1.0 - he) * pb);
}

double interpolate_phi(const LevelSetField& ls, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(ls.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(ls.height - 1));
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  x0 = std::min(x0, std::max(0, ls.width - 2));
  y0 = std::min(y0, std::max(0, ls.height - 2));
  const int x1 = std::min(x0 + 1, ls.width - 1);
  const int y1 = std::min(y0 + 1, ls.height - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = (1.0 - fx) * ls.at(x0, y0) + fx * ls.at(x1, y0);
  const double bottom = (1.0 - fx) * ls.at(x0, y1) + fx * ls.at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

std::optional<Row2> phi_gradient(const LevelSetField& ls, double x, double y) {
  if (!(x >= 1.0 && y >= 1.0 && x <= ls.width - 2.0 && y <= ls.height - 2.0)) return std::nullopt;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;

  // d/dx of the interpolant along row r, blended over the y cell.
  auto ddx_row = [&](int r) {
    if (fx > 0.0) return ls.at(x0 + 1, r) - ls.at(x0, r);
    return 0.5 * (ls.at(x0 + 1, r) - ls.at(x0 - 1, r));
  };
  auto ddy_col = [&](int c) {
    if (fy > 0.0) return ls.at(c, y0 + 1) - ls.at(c, y0);
    return 0.5 * (ls.at(c, y0 + 1) - ls.at(c, y0 - 1));
  };
  const double gx = fy > 0.0 ? (1.0 - fy) * ddx_row(y0) + fy * ddx_row(y0 + 1) : ddx_row(y0);
  const double gy = fx > 0.0 ? (1.0 - fx) * ddy_col(x0) + fx * ddy_col(x0 + 1) : ddy_col(x0);
  return Row2(gx, gy);
}

std::optional<Row2> pixel_gradient(const LevelSetField& ls, double x, double y, double p_fg, double p_bg,
                                   double slope, double floor) {
  const auto grad = phi_gradient(ls, x, y);
  if (!grad) return std::nullopt;
  const double pf = std::max(p_fg, floor);
  const double pb = std::max(p_bg, floor);
  const double phi = interpolate_phi(ls, x, y);
  const double he = smoothed_heaviside(phi, slope);
  const double dfdphi = -(pf - pb) * smoothed_heaviside_derivative(phi, slope) / (he * pf + (1.0 - he) * pb);
  return Row2(dfdphi * *grad);
}

ColorModel build_color_model(const RgbImage& image, const LevelSetField& ls, const ColorModel* prev,
                             const EnergyConfig& cfg) {
  if (image.width != ls.width || image.height != ls.height)
    throw InvalidArgument("build_color_model: image and level set dimensions differ");
  const int bins = cfg.hist_bins;
  const std::size_t cells = static_cast<std::size_t>(bins) * bins * bins;
  std::vector<double> fg(cells, 0.0), bg(cells, 0.0);
  const ColorModel indexer(bins, std::vector<double>(cells), std::vector<double>(cells));
  const double band = cfg.band_for_width(ls.width);
  std::size_t n_fg = 0, n_bg = 0;
  for (int y = 0; y < ls.height; ++y) {
    for (int x = 0; x < ls.width; ++x) {
      const double phi = ls.at(x, y);
      if (phi == 0.0 || std::abs(phi) > band) continue;
      const std::size_t bin = indexer.bin_index(image.at(x, y));
      if (phi > 0.0) {
        fg[bin] += 1.0;
        ++n_fg;
      } else {
        bg[bin] += 1.0;
        ++n_bg;
      }
    }
  }
  if (n_fg == 0) throw DegenerateRegion("color model: empty foreground region");
  if (n_bg == 0) throw DegenerateRegion("color model: empty background region");
  normalize_with_floor(fg, cfg.probability_floor);
  normalize_with_floor(bg, cfg.probability_floor);

  if (prev != nullptr && !prev->empty()) {
    if (prev->bins() != bins) throw InvalidArgument("build_color_model: previous model has different bin count");
    for (std::size_t i = 0; i < cells; ++i) {
      fg[i] = (1.0 - cfg.alpha_fg) * prev->fg()[i] + cfg.alpha_fg * fg[i];
      bg[i] = (1.0 - cfg.alpha_bg) * prev->bg()[i] + cfg.alpha_bg * bg[i];
    }
    renormalize(fg);
    renormalize(bg);
  }
  return ColorModel(bins, std::move(fg), std::move(bg));
}

}  // namespace mvtrack
