#pragma once

#include <Eigen/Core>
#include <utility>

#include "gmsdg/dg_form.hpp"

namespace gmsdg {

enum class SnapshotKind { Type1, Type2, Type1Oversampled };

/// Per-block snapshot space. Type-1 columns are harmonic extensions of the
/// stored traces (nodal indicators for the plain space, POD-compressed traces
/// for the oversampled one); type-2 columns are the interior nodal functions.
struct SnapshotSpace {
  int block = -1;
  SnapshotKind kind = SnapshotKind::Type1;
  Eigen::MatrixXd traces;           // 4nf x M (type-1 kinds)
  int interior_count = 0;           // type-2 column count
  Eigen::VectorXd pod_spectrum;     // full POD spectrum, descending (oversampled)
  int pod_kept = 0;

  int count() const {
    return kind == SnapshotKind::Type2 ? interior_count : static_cast<int>(traces.cols());
  }
  /// Materializes the k-th column as a block-local nodal vector.
  Eigen::VectorXd column(const DgContext& ctx, int k) const;
  Eigen::MatrixXd materialize(const DgContext& ctx) const;
};

/// Harmonic extensions of all boundary nodal traces.
SnapshotSpace build_snapshot1(const DgContext& ctx, int block);

/// Interior nodal functions (vanish on the block boundary).
SnapshotSpace build_snapshot2(const DgContext& ctx, int block);

/// Snapshot construction on the enlarged region K+ (the block padded by
/// `halo` blocks, clipped at the domain boundary): harmonic extensions of all
/// boundary nodal traces of K+, compressed by the POD eigenproblem
///   int_K psi v = lambda int_{dK+} psi v
/// keeping the n_pod largest modes; the kept traces on dK are re-extended
/// harmonically inside K.
SnapshotSpace build_oversampled_snapshots(const DgContext& ctx, int block, int halo,
                                          int n_pod);

/// Unique splitting u = u1 + u2 with u1 discrete-harmonic and u2 vanishing on
/// the block boundary.
std::pair<Eigen::VectorXd, Eigen::VectorXd> split_harmonic_interior(const DgContext& ctx,
                                                                    int block,
                                                                    const Eigen::VectorXd& u);

}  // namespace gmsdg
