#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <array>
#include <memory>

#include "gmsdg/field.hpp"
#include "gmsdg/grid.hpp"

namespace gmsdg {

/// Geometry-only operators shared by all (congruent) blocks.
struct BlockGeometry {
  Eigen::SparseMatrix<double> mass;  // unweighted P1 block mass, (nf+1)^2
  Eigen::MatrixXd boundary_mass;     // unweighted 1D P1 mass on the boundary loop, 4nf
  Eigen::LLT<Eigen::MatrixXd> boundary_llt;
  Eigen::MatrixXd edge_mass_x;  // (nf+1) 1D P1 mass of an x-running coarse edge
  Eigen::MatrixXd edge_mass_y;  // same for a y-running edge
  double perimeter = 0.0;
  double block_area = 0.0;
};

BlockGeometry build_block_geometry(const Grid& g);

/// kappa-weighted P1 stiffness over all block nodes. Exact for cell-wise
/// constant kappa; symmetric with zero row sums.
Eigen::SparseMatrix<double> local_stiffness(const Grid& g, const PermeabilityField& kappa,
                                            int block);

/// kappa-weighted P1 mass over all block nodes.
Eigen::SparseMatrix<double> weighted_mass_full(const Grid& g, const PermeabilityField& kappa,
                                               int block);

/// Interior-interior restriction of the kappa-weighted mass (ordering follows
/// Grid::interior_locals).
Eigen::SparseMatrix<double> weighted_mass_interior(const Grid& g,
                                                   const PermeabilityField& kappa, int block);

/// 1D P1 boundary-trace mass on the block boundary loop with one weight per
/// side (South, East, North, West).
Eigen::MatrixXd weighted_mass_boundary(const Grid& g, const std::array<double, 4>& side_weights);

/// P1 load vector of a cell-wise constant source, restricted to one block.
Eigen::VectorXd block_load_vector(const Grid& g, const Eigen::VectorXd& f_cells, int block);

/// Per-block kernels built once and reused by every snapshot, spectral and
/// assembly call on that block: stiffness, cached interior factorization,
/// the boundary Schur complement (energy of harmonic extensions), and the
/// variational-flux operator.
class BlockOperators {
 public:
  BlockOperators(const Grid& g, const PermeabilityField& kappa, int block,
                 const BlockGeometry& geom);

  int block() const { return block_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return A_; }
  const BlockGeometry& geometry() const { return *geom_; }
  double kappa_max() const { return kappa_max_; }

  /// Discrete harmonic extension of boundary values (length 4nf) into the
  /// block; returns the full nodal vector.
  Eigen::VectorXd harmonic_extend(const Eigen::VectorXd& trace) const;

  /// Variational normal flux of u as a functional on boundary traces:
  /// F_k = a_H^K(u, psi_k) with psi_k the harmonic extension of the k-th
  /// boundary nodal trace. Equals the boundary Schur complement applied to
  /// the trace of u.
  Eigen::VectorXd normal_flux(const Eigen::VectorXd& u) const;

  /// Nodal coefficients of the flux as an element of V_h(dK).
  Eigen::VectorXd flux_coefficients(const Eigen::VectorXd& u) const;

  /// Boundary Schur complement S = A_BB - A_BI A_II^{-1} A_IB; also the
  /// stiffness Gram of the type-1 snapshot basis.
  const Eigen::MatrixXd& harmonic_stiffness() const { return schur_; }

  /// C = M_b^{-1} S: maps a trace to the nodal flux coefficients of its
  /// harmonic extension.
  const Eigen::MatrixXd& flux_op() const { return flux_op_; }

  Eigen::VectorXd trace_of(const Eigen::VectorXd& u) const;
  Eigen::VectorXd restrict_interior(const Eigen::VectorXd& u) const;

  /// Solves A_II x = rhs on interior nodes (cached factorization).
  Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs) const;

  const Eigen::SparseMatrix<double>& interior_stiffness() const { return A_int_; }
  const Eigen::SparseMatrix<double>& interior_mass() const { return M_int_; }
  Eigen::VectorXd interior_mass_solve(const Eigen::VectorXd& rhs) const;

  Eigen::VectorXd load_vector(const Eigen::VectorXd& f_cells) const;
  /// Pairing of a block load with harmonic extensions of nodal traces:
  /// h_k = (L, psi_k) = L_B[k] + (E^T L_I)[k].
  Eigen::VectorXd harmonic_load(const Eigen::VectorXd& load) const;

 private:
  const Grid* grid_;
  const BlockGeometry* geom_;
  int block_;
  double kappa_max_ = 0.0;
  Eigen::SparseMatrix<double> A_;
  Eigen::SparseMatrix<double> A_int_;
  Eigen::SparseMatrix<double> M_int_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> interior_llt_;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> interior_mass_llt_;
  Eigen::MatrixXd schur_;
  Eigen::MatrixXd flux_op_;
};

}  // namespace gmsdg
