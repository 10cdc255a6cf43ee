#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "gmsdg/dg_form.hpp"
#include "gmsdg/snapshots.hpp"

namespace gmsdg {

/// Eigenpairs of one local spectral problem, in snapshot coordinates.
/// Eigenvectors are orthonormal in the V_j(K_i) inner product (the problem's
/// mass), eigenvalues ascending and clamped at zero, signs fixed so the
/// largest-magnitude coefficient is positive.
struct EigenData {
  int block = -1;
  int family = 0;  // 1 or 2
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // M x K, K <= M after dependence dropping

  int count() const { return static_cast<int>(eigenvalues.size()); }
  double largest() const { return count() ? eigenvalues[count() - 1] : 0.0; }
};

/// V1 inner-product Gram in snapshot coordinates: (ktilde/H) G^T M_b G.
Eigen::MatrixXd v1_mass(const DgContext& ctx, const SnapshotSpace& snap);
/// Snapshot-coordinate stiffness G^T S G.
Eigen::MatrixXd v1_stiffness(const DgContext& ctx, const SnapshotSpace& snap);

/// Family-1 spectral problem a(phi, v) = (lambda/H) int_dK ktilde phi v over
/// the snapshot space. Near-dependent snapshot directions are dropped at
/// relative tolerance 1e-12 before the eigensolve.
EigenData solve_spectral1(const DgContext& ctx, const SnapshotSpace& snap);

/// Family-2 spectral problem a(xi, v) = (lambda/H^2) int_K kappa xi v over the
/// interior space; first m_max pairs (clamped to the interior dimension).
EigenData solve_spectral2(const DgContext& ctx, int block, int m_max);

/// Active eigen-index sets per block and family; arbitrary subsets after
/// removal or pursuit.
struct OfflineState {
  std::vector<std::vector<int>> active1;  // sorted 0-based eigen-indices
  std::vector<std::vector<int>> active2;

  long dof() const;
  static OfflineState initial(int num_blocks, int l1, int l2);
  /// Smallest inactive index, or -1 when the family is exhausted.
  static int first_inactive(const std::vector<int>& active, int spectrum_size);
};

/// Snapshot spaces and spectra for the whole grid; family-2 spectra are
/// computed lazily per block. Offline columns are cached across enrichment
/// iterations.
struct MultiscaleSpace {
  std::vector<SnapshotSpace> snap1;
  std::vector<EigenData> eig1;
  mutable std::vector<std::optional<EigenData>> eig2;
  mutable std::vector<std::map<int, Eigen::VectorXd>> cache1, cache2;
  int m2_max = 64;

  static MultiscaleSpace build(const DgContext& ctx, bool oversample = false, int halo = 1,
                               int n_pod = 40, int m2_max = 64);
  const EigenData& family2(const DgContext& ctx, int block) const;
  bool has_family2(int block) const { return eig2[block].has_value(); }
  /// Fine column of one offline eigenfunction (cached).
  const Eigen::VectorXd& offline_column(const DgContext& ctx, int family, int block,
                                        int index) const;
};

/// Offline basis with (block, family, eigen-index) tags per column.
struct OfflineBasis {
  Basis basis;
  struct Tag {
    int block;
    int family;
    int index;
  };
  std::vector<Tag> tags;
};

OfflineBasis build_offline_space(const DgContext& ctx, const MultiscaleSpace& space,
                                 const OfflineState& state);

/// Mass-orthogonal truncation P_l(v) of a snapshot function: returns
/// (||v - P_l v||_{V_j}, lambda_{l+1}^{-1/2} * energy(v)^{1/2}); the first
/// never exceeds the second.
std::pair<double, double> projection_diagnostics(const DgContext& ctx,
                                                 const SnapshotSpace& snap,
                                                 const EigenData& eig,
                                                 const Eigen::VectorXd& v, int l);

}  // namespace gmsdg
