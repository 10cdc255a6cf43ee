#pragma once

#include <Eigen/Core>
#include <vector>

#include "gmsdg/dg_form.hpp"
#include "gmsdg/snapshots.hpp"
#include "gmsdg/spectral.hpp"

namespace gmsdg {

/// One (block, family) indicator: the residual dual norm, the next unused
/// eigenvalue, and eta^2 = ||R||^2 / lambda_next.
struct IndicatorEntry {
  int block = -1;
  int family = 0;
  double residual_norm = 0.0;
  double lambda_next = 0.0;
  double eta_sq = 0.0;
  bool frozen = false;  // spectrum exhausted, never enriched again
};

/// Flattened indicator list, descending by eta^2.
struct IndicatorSet {
  std::vector<IndicatorEntry> entries;
  double total = 0.0;

  std::vector<double> eta_sq_descending() const {
    std::vector<double> v;
    v.reserve(entries.size());
    for (const auto& e : entries) v.push_back(e.eta_sq);
    return v;
  }
};

/// Which spectral families participate in indicators and enrichment.
enum class Families { V1, V1V2 };

/// R_{j,i}(v_k) = rhs(v_k) - a_DG(u_H, v_k) over the block's snapshot basis
/// of family 1 (harmonic extensions) in snapshot coordinates.
Eigen::VectorXd residual_components_f1(const DgContext& ctx,
                                       const Eigen::VectorXd& rhs_global,
                                       const FineField& u_H, const SnapshotSpace& snap);

/// Same for family 2 (interior nodal functions); edge terms vanish.
Eigen::VectorXd residual_components_f2(const DgContext& ctx,
                                       const Eigen::VectorXd& rhs_global,
                                       const FineField& u_H, int block);

/// Dual norm sup |R(v)| / ||v||_{V_1(K_i)} via the weighted trace Gram; the
/// oversampled variant solves on the retained (independent) span.
double residual_dual_norm_f1(const DgContext& ctx, const SnapshotSpace& snap,
                             const EigenData& eig, const Eigen::VectorXd& r);

/// Dual norm in V_2(K_i) via the interior kappa-mass solve.
double residual_dual_norm_f2(const DgContext& ctx, int block, const Eigen::VectorXd& r);

/// Computes residual norms and eta^2 for every block (and family, when both
/// participate), sorted descending. Exhausted spectra yield frozen entries
/// with eta = 0.
IndicatorSet eta_and_S(const DgContext& ctx, const MultiscaleSpace& space,
                       const OfflineState& state, const Eigen::VectorXd& rhs_global,
                       const FineField& u_H, Families families);

/// zeta^2 = |R(v_l)|^2 / ||v_l||^2_{V_j} for each candidate eigenfunction,
/// given residual components r in snapshot coordinates.
std::vector<double> zeta_correlations(const DgContext& ctx, const SnapshotSpace& snap,
                                      const EigenData& eig, const Eigen::VectorXd& r,
                                      const std::vector<int>& candidates);

/// Localized energy ||u||^2_{a,K_i}: block volume term plus the block's edge
/// terms, interior edges weighted 1/2 so the blockwise sum matches the global
/// a-norm. Individual values may be negative; callers marking on them should
/// clamp at zero.
double exact_local_indicator_sq(const DgContext& ctx, const FineField& u, int block);

}  // namespace gmsdg
