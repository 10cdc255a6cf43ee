#include "gmsdg/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmsdg/parallel.hpp"

namespace gmsdg {

Eigen::VectorXd residual_components_f1(const DgContext& ctx,
                                       const Eigen::VectorXd& rhs_global,
                                       const FineField& u_H, const SnapshotSpace& snap) {
  const Eigen::VectorXd r_nodal = ctx.local_rhs_f1(rhs_global, snap.block) -
                                  ctx.local_action_f1(u_H, snap.block);
  return snap.traces.transpose() * r_nodal;
}

Eigen::VectorXd residual_components_f2(const DgContext& ctx,
                                       const Eigen::VectorXd& rhs_global,
                                       const FineField& u_H, int block) {
  return ctx.local_rhs_f2(rhs_global, block) - ctx.local_action_f2(u_H, block);
}

double residual_dual_norm_f1(const DgContext& ctx, const SnapshotSpace& snap,
                             const EigenData& eig, const Eigen::VectorXd& r) {
  if (snap.kind == SnapshotKind::Type1) {
    // ||R||^2 = r^T M1^{-1} r with M1 = (ktilde/H) M_b; cached boundary
    // factorization.
    const double scale = ctx.grid().H() / ctx.kappa_tilde(snap.block);
    const double q = r.dot(ctx.geometry().boundary_llt.solve(r));
    return std::sqrt(std::max(scale * q, 0.0));
  }
  // Oversampled traces may be near-dependent; the eigenvectors span the
  // retained subspace M1-orthonormally, so the Gram pseudo-solve is
  // sum_k (v_k^T r)^2.
  return std::sqrt((eig.eigenvectors.transpose() * r).squaredNorm());
}

double residual_dual_norm_f2(const DgContext& ctx, int block, const Eigen::VectorXd& r) {
  const double h2 = ctx.grid().H() * ctx.grid().H();
  const double q = r.dot(ctx.block(block).interior_mass_solve(r));
  return std::sqrt(std::max(h2 * q, 0.0));
}

IndicatorSet eta_and_S(const DgContext& ctx, const MultiscaleSpace& space,
                       const OfflineState& state, const Eigen::VectorXd& rhs_global,
                       const FineField& u_H, Families families) {
  const int n = ctx.grid().num_blocks();
  const bool both = families == Families::V1V2;
  // Family-2 spectra are built lazily and sequentially before the parallel
  // sweep.
  if (both)
    for (int i = 0; i < n; ++i) space.family2(ctx, i);

  IndicatorSet set;
  set.entries.resize(both ? 2 * n : n);
  parallel_for(n, [&](int i) {
    {
      IndicatorEntry e;
      e.block = i;
      e.family = 1;
      const Eigen::VectorXd r = residual_components_f1(ctx, rhs_global, u_H, space.snap1[i]);
      e.residual_norm = residual_dual_norm_f1(ctx, space.snap1[i], space.eig1[i], r);
      const int next = OfflineState::first_inactive(state.active1[i], space.eig1[i].count());
      if (next < 0) {
        e.frozen = true;
      } else {
        e.lambda_next = space.eig1[i].eigenvalues[next];
        e.eta_sq = e.lambda_next > 0.0
                       ? e.residual_norm * e.residual_norm / e.lambda_next
                       : std::numeric_limits<double>::infinity();
      }
      set.entries[i] = e;
    }
    if (both) {
      IndicatorEntry e;
      e.block = i;
      e.family = 2;
      const EigenData& e2 = space.family2(ctx, i);
      const Eigen::VectorXd r = residual_components_f2(ctx, rhs_global, u_H, i);
      e.residual_norm = residual_dual_norm_f2(ctx, i, r);
      const int next = OfflineState::first_inactive(state.active2[i], e2.count());
      if (next < 0) {
        e.frozen = true;
      } else {
        e.lambda_next = e2.eigenvalues[next];
        e.eta_sq = e.lambda_next > 0.0
                       ? e.residual_norm * e.residual_norm / e.lambda_next
                       : std::numeric_limits<double>::infinity();
      }
      set.entries[n + i] = e;
    }
  });

  std::sort(set.entries.begin(), set.entries.end(),
            [](const IndicatorEntry& a, const IndicatorEntry& b) {
              if (a.eta_sq != b.eta_sq) return a.eta_sq > b.eta_sq;
              if (a.block != b.block) return a.block < b.block;
              return a.family < b.family;
            });
  set.total = 0.0;
  for (const auto& e : set.entries) set.total += e.eta_sq;
  return set;
}

std::vector<double> zeta_correlations(const DgContext& ctx, const SnapshotSpace& snap,
                                      const EigenData& eig, const Eigen::VectorXd& r,
                                      const std::vector<int>& candidates) {
  std::vector<double> zeta;
  zeta.reserve(candidates.size());
  // ||v_l||_{V_j} = 1 by the eigensolver's normalization; computed anyway to
  // stay correct for externally supplied eigendata.
  Eigen::MatrixXd mass;
  if (eig.family == 1) {
    mass = v1_mass(ctx, snap);
  } else {
    const double h2 = ctx.grid().H() * ctx.grid().H();
    mass = Eigen::MatrixXd(ctx.block(eig.block).interior_mass()) / h2;
  }
  for (int l : candidates) {
    const Eigen::VectorXd v = eig.eigenvectors.col(l);
    const double num = std::abs(r.dot(v));
    const double den = std::sqrt(std::max(v.dot(mass * v), 0.0));
    zeta.push_back(den > 0.0 ? num / den : 0.0);
  }
  return zeta;
}

double exact_local_indicator_sq(const DgContext& ctx, const FineField& u, int block) {
  double val = ctx.block_segment(u, block)
                   .dot(ctx.block(block).stiffness() * ctx.block_segment(u, block));
  for (int e : ctx.grid().block_edges(block)) {
    const double w = ctx.grid().edge(e).boundary ? 1.0 : 0.5;
    val += w * ctx.edge_quadratic_terms(u, e);
  }
  return val;
}

}  // namespace gmsdg
