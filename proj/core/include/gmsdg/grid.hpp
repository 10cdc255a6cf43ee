#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gmsdg {

/// Axis-aligned computational domain.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Which side of a coarse block an edge lies on, counterclockwise.
enum class Side : int { South = 0, East = 1, North = 2, West = 3 };

/// One coarse edge. Interior edges have two owner blocks; the normal points
/// from the plus block to the minus block. The plus block is the one with the
/// smaller index. Boundary edges have a single owner (stored as plus) and an
/// outward normal.
struct CoarseEdge {
  int plus_block = -1;
  Side plus_side = Side::South;
  int minus_block = -1;  // -1 on boundary edges
  Side minus_side = Side::South;
  bool boundary = false;
  int run_axis = 0;  // 0: edge runs along x, 1: along y
};

/// Per-block topology view: node partitions and incident coarse edges.
struct BlockTopology {
  struct EdgeRef {
    int edge = -1;
    Side side = Side::South;
    double jump_sign = 1.0;  // +1 if this block is K+, else -1
    bool boundary = false;
  };

  int block = -1;
  int num_nodes = 0;
  std::vector<int> boundary_nodes;  // local ids, counterclockwise from origin corner
  std::vector<int> interior_nodes;  // local ids, row-major
  std::vector<EdgeRef> edges;
};

/// Structured coarse grid of Nc x Nc square blocks, each refined into an
/// nf x nf lattice of fine cells; every fine cell is split into two P1
/// triangles along its lower-left to upper-right diagonal. All blocks are
/// congruent, so node orderings and side layouts are shared.
///
/// Local node numbering inside a block is row-major: id = ly*(nf+1) + lx.
/// The boundary loop enumerates the 4*nf boundary nodes counterclockwise
/// starting at the block's origin corner.
class Grid {
 public:
  Grid(int Nc, int nf, Rect domain = Rect{});

  int coarse_per_axis() const { return Nc_; }
  int fine_per_block() const { return nf_; }
  int num_blocks() const { return Nc_ * Nc_; }
  int nodes_per_block() const { return (nf_ + 1) * (nf_ + 1); }
  int interior_per_block() const { return (nf_ - 1) * (nf_ - 1); }
  int boundary_per_block() const { return 4 * nf_; }
  int cells_per_axis() const { return Nc_ * nf_; }
  const Rect& domain() const { return domain_; }

  double Hx() const { return Hx_; }
  double Hy() const { return Hy_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  /// Coarse and fine mesh sizes used in the spectral/penalty scalings.
  double H() const { return Hx_ > Hy_ ? Hx_ : Hy_; }
  double h() const { return hx_ > hy_ ? hx_ : hy_; }

  int block_index(int bx, int by) const { return by * Nc_ + bx; }
  std::pair<int, int> block_coords(int block) const {
    return {block % Nc_, block / Nc_};
  }
  int local_node(int lx, int ly) const { return ly * (nf_ + 1) + lx; }
  std::pair<int, int> local_coords(int local) const {
    return {local % (nf_ + 1), local / (nf_ + 1)};
  }
  /// Physical coordinates of a fine node.
  std::pair<double, double> node_xy(int block, int local) const;

  int num_edges() const { return static_cast<int>(edges_.size()); }
  const CoarseEdge& edge(int e) const { return edges_[e]; }
  const std::vector<CoarseEdge>& edges() const { return edges_; }
  int num_interior_edges() const { return num_interior_edges_; }
  /// Fine segment length along an edge (hx for x-running, hy for y-running).
  double edge_h(const CoarseEdge& e) const { return e.run_axis == 0 ? hx_ : hy_; }

  /// Boundary-loop ordinals of the nf+1 nodes on one side, in geometric order
  /// (increasing x on horizontal sides, increasing y on vertical sides). The
  /// two blocks sharing an edge see the same geometric sequence.
  const std::vector<int>& side_positions(Side s) const {
    return side_positions_[static_cast<int>(s)];
  }
  /// Local node ids of the boundary loop (counterclockwise), and interior ids.
  const std::vector<int>& boundary_locals() const { return boundary_locals_; }
  const std::vector<int>& interior_locals() const { return interior_locals_; }
  /// Boundary ordinal of a local node, or -1 if interior.
  int boundary_ordinal(int local) const { return boundary_ordinal_[local]; }

  const std::vector<int>& block_edges(int block) const { return block_edges_[block]; }
  BlockTopology block_topology(int block) const;

 private:
  int Nc_ = 0;
  int nf_ = 0;
  Rect domain_;
  double Hx_ = 0, Hy_ = 0, hx_ = 0, hy_ = 0;
  std::vector<CoarseEdge> edges_;
  int num_interior_edges_ = 0;
  std::vector<std::vector<int>> block_edges_;
  std::vector<int> boundary_locals_;
  std::vector<int> interior_locals_;
  std::vector<int> boundary_ordinal_;
  std::array<std::vector<int>, 4> side_positions_;
};

/// Builds the grid, rejecting degenerate inputs.
Grid build_grid(int Nc, int nf, Rect domain = Rect{});

}  // namespace gmsdg
