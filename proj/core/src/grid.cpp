#include "gmsdg/grid.hpp"

namespace gmsdg {

Grid::Grid(int Nc, int nf, Rect domain) : Nc_(Nc), nf_(nf), domain_(domain) {
  if (Nc < 1) throw std::invalid_argument("grid: Nc must be >= 1");
  if (nf < 2) throw std::invalid_argument("grid: nf must be >= 2");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw std::invalid_argument("grid: degenerate domain");

  Hx_ = domain.width() / Nc;
  Hy_ = domain.height() / Nc;
  hx_ = Hx_ / nf;
  hy_ = Hy_ / nf;

  // Boundary loop: counterclockwise from the origin corner.
  boundary_locals_.reserve(4 * nf);
  for (int k = 0; k < nf; ++k) boundary_locals_.push_back(local_node(k, 0));
  for (int k = 0; k < nf; ++k) boundary_locals_.push_back(local_node(nf, k));
  for (int k = 0; k < nf; ++k) boundary_locals_.push_back(local_node(nf - k, nf));
  for (int k = 0; k < nf; ++k) boundary_locals_.push_back(local_node(0, nf - k));

  boundary_ordinal_.assign(nodes_per_block(), -1);
  for (int p = 0; p < static_cast<int>(boundary_locals_.size()); ++p)
    boundary_ordinal_[boundary_locals_[p]] = p;

  interior_locals_.reserve(interior_per_block());
  for (int ly = 1; ly < nf; ++ly)
    for (int lx = 1; lx < nf; ++lx) interior_locals_.push_back(local_node(lx, ly));

  // Side layouts in geometric order; nf+1 nodes including both corners.
  auto& south = side_positions_[static_cast<int>(Side::South)];
  auto& east = side_positions_[static_cast<int>(Side::East)];
  auto& north = side_positions_[static_cast<int>(Side::North)];
  auto& west = side_positions_[static_cast<int>(Side::West)];
  for (int k = 0; k <= nf; ++k) south.push_back(k);
  for (int k = 0; k <= nf; ++k) east.push_back(nf + k);
  for (int k = 0; k <= nf; ++k) north.push_back(3 * nf - k);
  west.push_back(0);
  for (int k = 1; k < nf; ++k) west.push_back(4 * nf - k);
  west.push_back(3 * nf);

  // Interior edges first (vertical between x-neighbours, then horizontal),
  // then the domain-boundary edges.
  for (int by = 0; by < Nc; ++by)
    for (int bx = 0; bx + 1 < Nc; ++bx) {
      CoarseEdge e;
      e.plus_block = block_index(bx, by);
      e.plus_side = Side::East;
      e.minus_block = block_index(bx + 1, by);
      e.minus_side = Side::West;
      e.boundary = false;
      e.run_axis = 1;
      edges_.push_back(e);
    }
  for (int by = 0; by + 1 < Nc; ++by)
    for (int bx = 0; bx < Nc; ++bx) {
      CoarseEdge e;
      e.plus_block = block_index(bx, by);
      e.plus_side = Side::North;
      e.minus_block = block_index(bx, by + 1);
      e.minus_side = Side::South;
      e.boundary = false;
      e.run_axis = 0;
      edges_.push_back(e);
    }
  num_interior_edges_ = static_cast<int>(edges_.size());

  auto add_boundary = [&](int block, Side side, int run_axis) {
    CoarseEdge e;
    e.plus_block = block;
    e.plus_side = side;
    e.boundary = true;
    e.run_axis = run_axis;
    edges_.push_back(e);
  };
  for (int bx = 0; bx < Nc; ++bx) add_boundary(block_index(bx, 0), Side::South, 0);
  for (int by = 0; by < Nc; ++by) add_boundary(block_index(Nc - 1, by), Side::East, 1);
  for (int bx = 0; bx < Nc; ++bx) add_boundary(block_index(bx, Nc - 1), Side::North, 0);
  for (int by = 0; by < Nc; ++by) add_boundary(block_index(0, by), Side::West, 1);

  block_edges_.resize(num_blocks());
  for (int e = 0; e < num_edges(); ++e) {
    block_edges_[edges_[e].plus_block].push_back(e);
    if (!edges_[e].boundary) block_edges_[edges_[e].minus_block].push_back(e);
  }
}

std::pair<double, double> Grid::node_xy(int block, int local) const {
  auto [bx, by] = block_coords(block);
  auto [lx, ly] = local_coords(local);
  return {domain_.x0 + bx * Hx_ + lx * hx_, domain_.y0 + by * Hy_ + ly * hy_};
}

BlockTopology Grid::block_topology(int block) const {
  if (block < 0 || block >= num_blocks())
    throw std::out_of_range("grid: block index out of range");
  BlockTopology t;
  t.block = block;
  t.num_nodes = nodes_per_block();
  t.boundary_nodes = boundary_locals_;
  t.interior_nodes = interior_locals_;
  for (int e : block_edges_[block]) {
    const CoarseEdge& ce = edges_[e];
    BlockTopology::EdgeRef ref;
    ref.edge = e;
    ref.boundary = ce.boundary;
    if (ce.plus_block == block) {
      ref.side = ce.plus_side;
      ref.jump_sign = 1.0;
    } else {
      ref.side = ce.minus_side;
      ref.jump_sign = -1.0;
    }
    t.edges.push_back(ref);
  }
  return t;
}

Grid build_grid(int Nc, int nf, Rect domain) { return Grid(Nc, nf, domain); }

}  // namespace gmsdg
