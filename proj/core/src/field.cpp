#include "gmsdg/field.hpp"

#include <random>

namespace gmsdg {

namespace {

// Deterministic helpers on top of mt19937_64; std::uniform_int_distribution is
// implementation-defined, so draws are reduced by hand.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

}  // namespace

double PermeabilityField::max_on_block(const Grid& g, int block) const {
  const int nf = g.fine_per_block();
  double m = 0.0;
  for (int cy = 0; cy < nf; ++cy)
    for (int cx = 0; cx < nf; ++cx) m = std::max(m, block_cell(g, block, cx, cy));
  return m;
}

PermeabilityField constant_field(const Grid& g, double value) {
  PermeabilityField f;
  f.nx = f.ny = g.cells_per_axis();
  f.values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(f.nx) * f.ny, value);
  return f;
}

PermeabilityField channels_field(const Grid& g, double contrast, std::uint64_t seed,
                                 int num_channels) {
  PermeabilityField f = constant_field(g, 1.0);
  const int n = g.cells_per_axis();
  if (num_channels < 0) num_channels = std::max(2, g.coarse_per_axis());
  const int thick = std::max(1, g.fine_per_block() / 8);
  std::mt19937_64 rng(seed);
  const int n_h = num_channels / 2 + num_channels % 2;
  const int n_v = num_channels / 2;
  for (int c = 0; c < n_h; ++c) {
    int row = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(n - thick)));
    for (int t = 0; t < thick; ++t)
      for (int cx = 0; cx < n; ++cx) f.at(cx, row + t) = contrast;
  }
  for (int c = 0; c < n_v; ++c) {
    int col = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(n - thick)));
    for (int t = 0; t < thick; ++t)
      for (int cy = 0; cy < n; ++cy) f.at(col + t, cy) = contrast;
  }
  return f;
}

PermeabilityField inclusions_field(const Grid& g, double contrast, std::uint64_t seed,
                                   int count) {
  PermeabilityField f = constant_field(g, 1.0);
  const int n = g.cells_per_axis();
  if (count < 0) count = std::max(4, g.num_blocks() / 4);
  const int max_size = std::max(2, g.fine_per_block() / 2);
  std::mt19937_64 rng(seed);
  for (int c = 0; c < count; ++c) {
    int w = 1 + static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(max_size)));
    int h = 1 + static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(max_size)));
    int x = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(n - w)));
    int y = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(n - h)));
    for (int cy = y; cy < y + h; ++cy)
      for (int cx = x; cx < x + w; ++cx) f.at(cx, cy) = contrast;
  }
  return f;
}

Eigen::VectorXd constant_source(const Grid& g, double value) {
  const int n = g.cells_per_axis();
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n) * n, value);
}

Eigen::VectorXd two_region_source(const Grid& g, double amp) {
  const int n = g.cells_per_axis();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * n);
  const Rect& d = g.domain();
  auto in_box = [](double x, double y, double a0, double b0, double a1, double b1) {
    return x >= a0 && x <= a1 && y >= b0 && y <= b1;
  };
  for (int cy = 0; cy < n; ++cy)
    for (int cx = 0; cx < n; ++cx) {
      double x = d.x0 + (cx + 0.5) * d.width() / n;
      double y = d.y0 + (cy + 0.5) * d.height() / n;
      double ux = (x - d.x0) / d.width();
      double uy = (y - d.y0) / d.height();
      if (in_box(ux, uy, 0.125, 0.125, 0.375, 0.375))
        f[cy * n + cx] = amp;
      else if (in_box(ux, uy, 0.625, 0.625, 0.875, 0.875))
        f[cy * n + cx] = -amp;
    }
  return f;
}

}  // namespace gmsdg
