#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "gmsdg/grid.hpp"

namespace gmsdg {

/// Piecewise-constant coefficient on the global fine-cell lattice
/// (cells_per_axis x cells_per_axis, row-major). Values must be >= 1.
struct PermeabilityField {
  int nx = 0;
  int ny = 0;
  Eigen::VectorXd values;

  double at(int cx, int cy) const { return values[cy * nx + cx]; }
  double& at(int cx, int cy) { return values[cy * nx + cx]; }
  /// Value on cell (cx, cy) of the given block's local cell lattice.
  double block_cell(const Grid& g, int block, int cx, int cy) const {
    auto [bx, by] = g.block_coords(block);
    return at(bx * g.fine_per_block() + cx, by * g.fine_per_block() + cy);
  }
  double max_on_block(const Grid& g, int block) const;
};

PermeabilityField constant_field(const Grid& g, double value = 1.0);

/// High-permeability strips spanning the domain, half horizontal and half
/// vertical. Deterministic in the seed.
PermeabilityField channels_field(const Grid& g, double contrast, std::uint64_t seed,
                                 int num_channels = -1);

/// Random rectangular high-permeability blobs. Deterministic in the seed.
PermeabilityField inclusions_field(const Grid& g, double contrast, std::uint64_t seed,
                                   int count = -1);

/// Cell-wise source fields.
Eigen::VectorXd constant_source(const Grid& g, double value);
/// +amp on one subdomain box, -amp on another, zero elsewhere.
Eigen::VectorXd two_region_source(const Grid& g, double amp);

}  // namespace gmsdg
