#include "gmsdg/snapshots.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <stdexcept>
#include <vector>

namespace gmsdg {

namespace {

// Conforming P1 solver on a rectangular patch of coarse blocks. Node ids are
// row-major over the patch lattice.
struct Patch {
  int bx0, by0, bw, bh;  // block range
  int cw, ch;            // fine cells per axis
  int pw, ph;            // nodes per axis

  Patch(const Grid& g, int block, int halo) {
    auto [bx, by] = g.block_coords(block);
    const int nc = g.coarse_per_axis();
    bx0 = std::max(0, bx - halo);
    by0 = std::max(0, by - halo);
    const int bx1 = std::min(nc - 1, bx + halo);
    const int by1 = std::min(nc - 1, by + halo);
    bw = bx1 - bx0 + 1;
    bh = by1 - by0 + 1;
    cw = bw * g.fine_per_block();
    ch = bh * g.fine_per_block();
    pw = cw + 1;
    ph = ch + 1;
  }

  int node(int gx, int gy) const { return gy * pw + gx; }
  int num_nodes() const { return pw * ph; }
  bool on_boundary(int gx, int gy) const {
    return gx == 0 || gy == 0 || gx == cw || gy == ch;
  }

  // Boundary loop, counterclockwise from (0,0).
  std::vector<int> boundary_loop() const {
    std::vector<int> loop;
    loop.reserve(2 * (cw + ch));
    for (int k = 0; k < cw; ++k) loop.push_back(node(k, 0));
    for (int k = 0; k < ch; ++k) loop.push_back(node(cw, k));
    for (int k = 0; k < cw; ++k) loop.push_back(node(cw - k, ch));
    for (int k = 0; k < ch; ++k) loop.push_back(node(0, ch - k));
    return loop;
  }
};

Eigen::Matrix3d patch_tri_stiffness(double hx, double hy, bool lower) {
  // Same diagonal rule as the block assembly: lower triangle
  // (0,0),(hx,0),(hx,hy); upper triangle (0,0),(hx,hy),(0,hy).
  Eigen::Matrix<double, 2, 3> b;
  double area2 = hx * hy;
  if (lower) {
    b.col(0) << 0.0 - hy, hx - hx;   // p1=(hx,0), p2=(hx,hy)
    b.col(1) << hy - 0.0, 0.0 - hx;
    b.col(2) << 0.0 - 0.0, hx - 0.0;
  } else {
    b.col(0) << hy - hy, 0.0 - hx;   // p1=(hx,hy), p2=(0,hy)
    b.col(1) << hy - 0.0, 0.0 - 0.0;
    b.col(2) << 0.0 - hy, hx - 0.0;
  }
  return (b.transpose() * b) / (2.0 * area2);
}

}  // namespace

Eigen::VectorXd SnapshotSpace::column(const DgContext& ctx, int k) const {
  if (k < 0 || k >= count()) throw std::out_of_range("snapshots: column index");
  if (kind == SnapshotKind::Type2) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(ctx.grid().nodes_per_block());
    u[ctx.grid().interior_locals()[k]] = 1.0;
    return u;
  }
  return ctx.block(block).harmonic_extend(traces.col(k));
}

Eigen::MatrixXd SnapshotSpace::materialize(const DgContext& ctx) const {
  Eigen::MatrixXd out(ctx.grid().nodes_per_block(), count());
  for (int k = 0; k < count(); ++k) out.col(k) = column(ctx, k);
  return out;
}

SnapshotSpace build_snapshot1(const DgContext& ctx, int block) {
  SnapshotSpace s;
  s.block = block;
  s.kind = SnapshotKind::Type1;
  s.traces = Eigen::MatrixXd::Identity(ctx.grid().boundary_per_block(),
                                       ctx.grid().boundary_per_block());
  return s;
}

SnapshotSpace build_snapshot2(const DgContext& ctx, int block) {
  SnapshotSpace s;
  s.block = block;
  s.kind = SnapshotKind::Type2;
  s.interior_count = ctx.grid().interior_per_block();
  return s;
}

SnapshotSpace build_oversampled_snapshots(const DgContext& ctx, int block, int halo,
                                          int n_pod) {
  if (halo < 1) throw std::invalid_argument("snapshots: halo must be >= 1");
  const Grid& g = ctx.grid();
  const PermeabilityField& kappa = ctx.kappa();
  const Patch patch(g, block, halo);

  // Patch stiffness with the same diagonal split and cell-wise kappa.
  const Eigen::Matrix3d k1 = patch_tri_stiffness(g.hx(), g.hy(), true);
  const Eigen::Matrix3d k2 = patch_tri_stiffness(g.hx(), g.hy(), false);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(patch.cw) * patch.ch * 18);
  const int nf = g.fine_per_block();
  for (int cy = 0; cy < patch.ch; ++cy)
    for (int cx = 0; cx < patch.cw; ++cx) {
      const double k = kappa.at(patch.bx0 * nf + cx, patch.by0 * nf + cy);
      const int n00 = patch.node(cx, cy);
      const int n10 = patch.node(cx + 1, cy);
      const int n01 = patch.node(cx, cy + 1);
      const int n11 = patch.node(cx + 1, cy + 1);
      const std::array<int, 3> t1{n00, n10, n11};
      const std::array<int, 3> t2{n00, n11, n01};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          trip.emplace_back(t1[i], t1[j], k * k1(i, j));
          trip.emplace_back(t2[i], t2[j], k * k2(i, j));
        }
    }
  Eigen::SparseMatrix<double> A(patch.num_nodes(), patch.num_nodes());
  A.setFromTriplets(trip.begin(), trip.end());

  // Interior factorization of the patch.
  std::vector<int> interior, pos(patch.num_nodes(), -1);
  for (int gy = 0; gy <= patch.ch; ++gy)
    for (int gx = 0; gx <= patch.cw; ++gx)
      if (!patch.on_boundary(gx, gy)) {
        pos[patch.node(gx, gy)] = static_cast<int>(interior.size());
        interior.push_back(patch.node(gx, gy));
      }
  std::vector<Eigen::Triplet<double>> itrip;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0)
        itrip.emplace_back(pos[it.row()], pos[it.col()], it.value());
  Eigen::SparseMatrix<double> Aii(interior.size(), interior.size());
  Aii.setFromTriplets(itrip.begin(), itrip.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Aii);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("snapshots: patch factorization failed");

  const std::vector<int> loop = patch.boundary_loop();
  const int nb_patch = static_cast<int>(loop.size());
  const int kept = std::min(n_pod, nb_patch);
  if (kept < 1) throw std::invalid_argument("snapshots: n_pod must be >= 1");

  // Where the center block sits inside the patch.
  auto [bx, by] = g.block_coords(block);
  const int ox = (bx - patch.bx0) * nf;
  const int oy = (by - patch.by0) * nf;
  const int npb = g.nodes_per_block();

  // Harmonic extension of each patch-boundary nodal trace, restricted to the
  // center block.
  Eigen::MatrixXd psi_center(npb, nb_patch);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(patch.num_nodes());
  for (int k = 0; k < nb_patch; ++k) {
    full.setZero();
    full[loop[k]] = 1.0;
    Eigen::VectorXd r = A * full;
    Eigen::VectorXd ri(interior.size());
    for (size_t p = 0; p < interior.size(); ++p) ri[p] = r[interior[p]];
    Eigen::VectorXd ui = llt.solve(-ri);
    for (int ly = 0; ly <= nf; ++ly)
      for (int lx = 0; lx <= nf; ++lx) {
        const int pn = patch.node(ox + lx, oy + ly);
        double val = (pos[pn] >= 0) ? ui[pos[pn]] : full[pn];
        psi_center(g.local_node(lx, ly), k) = val;
      }
  }

  // POD eigenproblem: center-block L2 Gram against the patch boundary mass.
  Eigen::MatrixXd a_pod = psi_center.transpose() *
                          (ctx.geometry().mass * psi_center).eval();
  Eigen::MatrixXd b_pod = Eigen::MatrixXd::Zero(nb_patch, nb_patch);
  for (int p = 0; p < nb_patch; ++p) {
    const int q = (p + 1) % nb_patch;
    const bool x_run = (p < patch.cw) || (p >= patch.cw + patch.ch && p < 2 * patch.cw + patch.ch);
    const double len = x_run ? g.hx() : g.hy();
    b_pod(p, p) += len / 3.0;
    b_pod(q, q) += len / 3.0;
    b_pod(p, q) += len / 6.0;
    b_pod(q, p) += len / 6.0;
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a_pod, b_pod);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("snapshots: POD eigensolve failed");

  SnapshotSpace s;
  s.block = block;
  s.kind = SnapshotKind::Type1Oversampled;
  s.pod_spectrum = es.eigenvalues().reverse();
  s.pod_kept = kept;

  // Traces on dK of the kept (largest-lambda) modes, re-extended later.
  const auto& bl = g.boundary_locals();
  Eigen::MatrixXd raw(g.boundary_per_block(), kept);
  for (int j = 0; j < kept; ++j) {
    const Eigen::VectorXd mode = psi_center * es.eigenvectors().col(nb_patch - 1 - j);
    for (int p = 0; p < g.boundary_per_block(); ++p) raw(p, j) = mode[bl[p]];
  }

  // The kept traces are near-dependent on dK (patch boundary layers decay
  // fast); remove the dependence in the dK inner product, drop tolerance
  // 1e-12, and keep an orthonormal trace basis of the same span.
  const Eigen::MatrixXd gram =
      raw.transpose() * ctx.geometry().boundary_mass * raw;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ges(gram);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("snapshots: trace Gram eigensolve failed");
  const Eigen::VectorXd d = ges.eigenvalues();
  const double dmax = d[d.size() - 1];
  if (!(dmax > 0.0)) throw std::runtime_error("snapshots: degenerate POD traces");
  int first = 0;
  while (first < d.size() && d[first] <= 1e-12 * dmax) ++first;
  const int rank = static_cast<int>(d.size()) - first;
  s.traces.resize(g.boundary_per_block(), rank);
  for (int j = 0; j < rank; ++j)
    s.traces.col(j) =
        raw * (ges.eigenvectors().col(first + j) / std::sqrt(d[first + j]));
  return s;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> split_harmonic_interior(const DgContext& ctx,
                                                                    int block,
                                                                    const Eigen::VectorXd& u) {
  const BlockOperators& ops = ctx.block(block);
  Eigen::VectorXd u1 = ops.harmonic_extend(ops.trace_of(u));
  return {u1, u - u1};
}

}  // namespace gmsdg
