#include "gmsdg/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace gmsdg {

namespace {

constexpr double kDropTol = 1e-12;

void fix_signs(Eigen::MatrixXd& vecs) {
  for (int c = 0; c < vecs.cols(); ++c) {
    int imax = 0;
    vecs.col(c).cwiseAbs().maxCoeff(&imax);
    if (vecs(imax, c) < 0.0) vecs.col(c) = -vecs.col(c);
  }
}

/// Generalized symmetric eigensolve A c = lambda M c with M SPD up to
/// near-null directions, which are dropped at relative tolerance droptol.
/// Eigenvectors come back M-orthonormal, eigenvalues ascending, clamped at 0.
void whitened_gevp(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, double droptol,
                   Eigen::VectorXd& evals, Eigen::MatrixXd& evecs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esm(M);
  if (esm.info() != Eigen::Success)
    throw std::runtime_error("spectral: mass eigendecomposition failed");
  const Eigen::VectorXd d = esm.eigenvalues();
  const double dmax = d[d.size() - 1];
  if (!(dmax > 0.0)) throw std::runtime_error("spectral: singular mass matrix");
  int first = 0;
  while (first < d.size() && d[first] <= droptol * dmax) ++first;
  const int kept = static_cast<int>(d.size()) - first;
  Eigen::MatrixXd w(M.rows(), kept);
  for (int j = 0; j < kept; ++j)
    w.col(j) = esm.eigenvectors().col(first + j) / std::sqrt(d[first + j]);

  Eigen::MatrixXd b = w.transpose() * A * w;
  b = 0.5 * (b + b.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral: eigensolve failed");
  evals = es.eigenvalues().cwiseMax(0.0);
  evecs = w * es.eigenvectors();
  fix_signs(evecs);
}

}  // namespace

Eigen::MatrixXd v1_mass(const DgContext& ctx, const SnapshotSpace& snap) {
  const double scale = ctx.kappa_tilde(snap.block) / ctx.grid().H();
  return scale * (snap.traces.transpose() * ctx.geometry().boundary_mass * snap.traces);
}

Eigen::MatrixXd v1_stiffness(const DgContext& ctx, const SnapshotSpace& snap) {
  return snap.traces.transpose() * ctx.block(snap.block).harmonic_stiffness() * snap.traces;
}

EigenData solve_spectral1(const DgContext& ctx, const SnapshotSpace& snap) {
  if (snap.kind == SnapshotKind::Type2)
    throw std::invalid_argument("spectral: family-1 problem needs a type-1 space");
  EigenData e;
  e.block = snap.block;
  e.family = 1;
  whitened_gevp(v1_stiffness(ctx, snap), v1_mass(ctx, snap), kDropTol, e.eigenvalues,
                e.eigenvectors);
  return e;
}

EigenData solve_spectral2(const DgContext& ctx, int block, int m_max) {
  const BlockOperators& ops = ctx.block(block);
  const int dim = static_cast<int>(ops.interior_stiffness().rows());
  if (m_max > dim) {
    std::cerr << "spectral: m_max " << m_max << " clamped to interior dimension " << dim
              << "\n";
    m_max = dim;
  }
  if (m_max < 1) throw std::invalid_argument("spectral: m_max must be >= 1");
  const double h2 = ctx.grid().H() * ctx.grid().H();
  Eigen::MatrixXd A = Eigen::MatrixXd(ops.interior_stiffness());
  Eigen::MatrixXd M = Eigen::MatrixXd(ops.interior_mass()) / h2;
  EigenData e;
  e.block = block;
  e.family = 2;
  whitened_gevp(A, M, kDropTol, e.eigenvalues, e.eigenvectors);
  if (e.count() > m_max) {
    e.eigenvalues.conservativeResize(m_max);
    e.eigenvectors.conservativeResize(Eigen::NoChange, m_max);
  }
  return e;
}

long OfflineState::dof() const {
  long d = 0;
  for (const auto& s : active1) d += static_cast<long>(s.size());
  for (const auto& s : active2) d += static_cast<long>(s.size());
  return d;
}

OfflineState OfflineState::initial(int num_blocks, int l1, int l2) {
  OfflineState st;
  st.active1.resize(num_blocks);
  st.active2.resize(num_blocks);
  for (int i = 0; i < num_blocks; ++i) {
    for (int k = 0; k < l1; ++k) st.active1[i].push_back(k);
    for (int k = 0; k < l2; ++k) st.active2[i].push_back(k);
  }
  return st;
}

int OfflineState::first_inactive(const std::vector<int>& active, int spectrum_size) {
  int expect = 0;
  for (int a : active) {
    if (a > expect) break;
    if (a == expect) ++expect;
  }
  return expect < spectrum_size ? expect : -1;
}

MultiscaleSpace MultiscaleSpace::build(const DgContext& ctx, bool oversample, int halo,
                                       int n_pod, int m2_max) {
  const int n = ctx.grid().num_blocks();
  MultiscaleSpace s;
  s.m2_max = m2_max;
  s.snap1.resize(n);
  s.eig1.resize(n);
  s.eig2.resize(n);
  s.cache1.resize(n);
  s.cache2.resize(n);
  for (int i = 0; i < n; ++i) {
    s.snap1[i] = oversample ? build_oversampled_snapshots(ctx, i, halo, n_pod)
                            : build_snapshot1(ctx, i);
    s.eig1[i] = solve_spectral1(ctx, s.snap1[i]);
  }
  return s;
}

const EigenData& MultiscaleSpace::family2(const DgContext& ctx, int block) const {
  if (!eig2[block]) eig2[block] = solve_spectral2(ctx, block, m2_max);
  return *eig2[block];
}

const Eigen::VectorXd& MultiscaleSpace::offline_column(const DgContext& ctx, int family,
                                                       int block, int index) const {
  auto& cache = (family == 1) ? cache1[block] : cache2[block];
  auto it = cache.find(index);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd col;
  if (family == 1) {
    const Eigen::VectorXd trace = snap1[block].traces * eig1[block].eigenvectors.col(index);
    col = ctx.block(block).harmonic_extend(trace);
  } else {
    const EigenData& e2 = family2(ctx, block);
    col = Eigen::VectorXd::Zero(ctx.grid().nodes_per_block());
    const auto& il = ctx.grid().interior_locals();
    for (int p = 0; p < static_cast<int>(il.size()); ++p)
      col[il[p]] = e2.eigenvectors(p, index);
  }
  return cache.emplace(index, std::move(col)).first->second;
}

OfflineBasis build_offline_space(const DgContext& ctx, const MultiscaleSpace& space,
                                 const OfflineState& state) {
  OfflineBasis ob;
  const int n = ctx.grid().num_blocks();
  ob.basis.init(n);
  for (int i = 0; i < n; ++i) {
    for (int k : state.active1[i]) {
      if (k < 0 || k >= space.eig1[i].count())
        throw std::out_of_range("spectral: family-1 active index out of range");
      ob.basis.add(i, space.offline_column(ctx, 1, i, k));
      ob.tags.push_back({i, 1, k});
    }
    for (int k : state.active2[i]) {
      const EigenData& e2 = space.family2(ctx, i);
      if (k < 0 || k >= e2.count())
        throw std::out_of_range("spectral: family-2 active index out of range");
      ob.basis.add(i, space.offline_column(ctx, 2, i, k));
      ob.tags.push_back({i, 2, k});
    }
  }
  if (ob.basis.size() == 0) throw std::invalid_argument("spectral: empty offline space");
  return ob;
}

std::pair<double, double> projection_diagnostics(const DgContext& ctx,
                                                 const SnapshotSpace& snap,
                                                 const EigenData& eig,
                                                 const Eigen::VectorXd& v, int l) {
  if (l < 0 || l >= eig.count())
    throw std::out_of_range("spectral: truncation level outside spectrum");
  Eigen::MatrixXd mass, stiff;
  if (eig.family == 1) {
    mass = v1_mass(ctx, snap);
    stiff = v1_stiffness(ctx, snap);
  } else {
    const BlockOperators& ops = ctx.block(eig.block);
    const double h2 = ctx.grid().H() * ctx.grid().H();
    mass = Eigen::MatrixXd(ops.interior_mass()) / h2;
    stiff = Eigen::MatrixXd(ops.interior_stiffness());
  }
  const Eigen::VectorXd mv = mass * v;
  const Eigen::VectorXd coeff = eig.eigenvectors.leftCols(l).transpose() * mv;
  double resid_sq = v.dot(mv) - coeff.squaredNorm();
  resid_sq = std::max(resid_sq, 0.0);
  const double energy = std::max(v.dot(stiff * v), 0.0);
  const double lam = eig.eigenvalues[l];
  const double bound =
      lam > 0.0 ? std::sqrt(energy / lam) : std::numeric_limits<double>::infinity();
  return {std::sqrt(resid_sq), bound};
}

}  // namespace gmsdg
