#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "gmsdg/field.hpp"
#include "gmsdg/grid.hpp"
#include "gmsdg/local_fem.hpp"

namespace gmsdg {

/// A broken fine-grid function: block-major nodal coefficients, one
/// (nf+1)^2 segment per block.
using FineField = Eigen::VectorXd;

/// Problem data. The right-hand side functional is either (f, v) plus weak
/// Dirichlet boundary terms for g, or a_DG(w, v) for a manufactured fine
/// field w (whose fine solution is then w itself).
struct Problem {
  Eigen::VectorXd f_cells;                    // cell-wise source; empty means zero
  std::function<double(double, double)> g;    // Dirichlet data; null means zero
  std::optional<FineField> manufactured;      // overrides f and g when set
};

/// Galerkin system of a_DG in a supplied basis.
struct DGSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  std::vector<int> basis_block;  // owning block of each basis column
  double gamma = 0.0;
};

/// Basis of block-supported fine functions.
struct Basis {
  std::vector<int> block_of;
  std::vector<Eigen::VectorXd> columns;  // block-local nodal vectors
  std::vector<std::vector<int>> by_block;

  void init(int num_blocks) { by_block.assign(num_blocks, {}); }
  int add(int block, Eigen::VectorXd col) {
    int id = static_cast<int>(columns.size());
    block_of.push_back(block);
    columns.push_back(std::move(col));
    by_block[block].push_back(id);
    return id;
  }
  int size() const { return static_cast<int>(columns.size()); }
};

/// The global interior-penalty form
///   a_DG(u,v) = a_H(u,v) - sum_E int_E ({flux_u}[v] + {flux_v}[u])
///             + sum_E (gamma/h) int_E kbar [u][v],
/// with the variational normal flux of each side represented in V_h(dK).
/// Owns the per-block operators and the edge data (kbar, ktilde).
class DgContext {
 public:
  DgContext(const Grid& grid, const PermeabilityField& kappa, double gamma);

  const Grid& grid() const { return *grid_; }
  const PermeabilityField& kappa() const { return *kappa_; }
  double gamma() const { return gamma_; }
  /// Penalty is independent of the cached block operators, so auto-gamma can
  /// be resolved after the spectra exist.
  void set_gamma(double gamma);
  const BlockGeometry& geometry() const { return geom_; }
  const BlockOperators& block(int i) const { return *ops_[i]; }

  double kappa_bar(int edge) const { return kappa_bar_[edge]; }
  /// Max of kappa_bar over the block's edges.
  double kappa_tilde(int block) const { return kappa_tilde_[block]; }
  /// max_K (max_E kbar / min_E kbar), the contrast spread entering auto-gamma.
  double c_kappa() const;

  int field_size() const { return grid_->num_blocks() * grid_->nodes_per_block(); }
  Eigen::Ref<const Eigen::VectorXd> block_segment(const FineField& u, int i) const {
    return u.segment(static_cast<Eigen::Index>(i) * grid_->nodes_per_block(),
                     grid_->nodes_per_block());
  }
  Eigen::Ref<Eigen::VectorXd> block_segment(FineField& u, int i) const {
    return u.segment(static_cast<Eigen::Index>(i) * grid_->nodes_per_block(),
                     grid_->nodes_per_block());
  }

  /// a_DG(u, v) for fine fields.
  double evaluate(const FineField& u, const FineField& v) const;
  /// ||u||_DG^2 = a_H(u,u) + sum_E (gamma/h) int_E kbar [u]^2.
  double dg_norm_sq(const FineField& u) const;
  /// Blockwise energy a_H(u,v).
  double volume_form(const FineField& u, const FineField& v) const;
  /// Unweighted L2 inner product of fine fields.
  double l2_inner(const FineField& u, const FineField& v) const;

  /// y with y_n = a_DG(u, e_n): the matrix-free action of the fine operator.
  FineField apply(const FineField& u) const;

  /// Global fine right-hand side vector of the problem functional.
  Eigen::VectorXd rhs_fine(const Problem& p) const;

  /// Sparse fine system of a_DG over the full broken nodal basis.
  Eigen::SparseMatrix<double> assemble_fine() const;

  /// Dense Galerkin system over an arbitrary block-supported basis.
  DGSystem assemble(const Basis& basis, const Problem& p) const;

  /// a_DG(u, .) tested against the block's nodal-trace harmonic extensions;
  /// returns a 4nf vector indexed by boundary ordinal.
  Eigen::VectorXd local_action_f1(const FineField& u, int block) const;
  /// a_DG(u, .) tested against the block's interior nodal functions.
  Eigen::VectorXd local_action_f2(const FineField& u, int block) const;
  /// rhs(.) against the same two test families.
  Eigen::VectorXd local_rhs_f1(const Eigen::VectorXd& rhs_global, int block) const;
  Eigen::VectorXd local_rhs_f2(const Eigen::VectorXd& rhs_global, int block) const;

  /// -2 int_E {flux_u}[u] + (gamma/h) int_E kbar [u]^2 of one edge; the edge
  /// part of the localized energy norm.
  double edge_quadratic_terms(const FineField& u, int edge) const;

 private:
  struct SideInfo {
    int block;
    Side side;
    double jump_sign;  // +1 on K+, -1 on K-
    double avg_weight; // 1/2 on interior edges, 1 on boundary edges
  };
  int num_sides(int edge) const { return grid_->edge(edge).boundary ? 1 : 2; }
  SideInfo side_info(int edge, int s) const;
  const Eigen::MatrixXd& edge_mass(int edge) const {
    return grid_->edge(edge).run_axis == 0 ? geom_.edge_mass_x : geom_.edge_mass_y;
  }
  // Jump and flux-average of u on the edge's nf+1 nodes.
  void edge_traces(const FineField& u, int edge, Eigen::VectorXd& jump,
                   Eigen::VectorXd& flux_avg) const;

  const Grid* grid_;
  const PermeabilityField* kappa_;
  double gamma_;
  BlockGeometry geom_;
  std::vector<std::unique_ptr<BlockOperators>> ops_;
  std::vector<double> kappa_bar_;
  std::vector<double> kappa_tilde_;
};

/// sqrt(c^T S c) in an assembled system; throws if the quadratic form is
/// negative beyond round-off.
double a_norm(const DGSystem& system, const Eigen::VectorXd& coefficients);

}  // namespace gmsdg
