#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "gmsdg/spectral.hpp"

using namespace gmsdg;

namespace {

PermeabilityField random_kappa(const Grid& g, unsigned seed) {
  PermeabilityField f = constant_field(g, 1.0);
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < f.values.size(); ++i)
    f.values[i] = 1.0 + (rng() >> 11) * 0x1p-53 * 99.0;
  return f;
}

// Dense Schur complement straight from a dense copy of the block stiffness.
Eigen::MatrixXd dense_schur(const DgContext& ctx, int block) {
  const Grid& g = ctx.grid();
  Eigen::MatrixXd A(ctx.block(block).stiffness());
  const auto& bl = g.boundary_locals();
  const auto& il = g.interior_locals();
  const int nb = static_cast<int>(bl.size()), ni = static_cast<int>(il.size());
  Eigen::MatrixXd abb(nb, nb), abi(nb, ni), aib(ni, nb), aii(ni, ni);
  for (int p = 0; p < nb; ++p)
    for (int q = 0; q < nb; ++q) abb(p, q) = A(bl[p], bl[q]);
  for (int p = 0; p < nb; ++p)
    for (int q = 0; q < ni; ++q) abi(p, q) = A(bl[p], il[q]);
  for (int p = 0; p < ni; ++p)
    for (int q = 0; q < nb; ++q) aib(p, q) = A(il[p], bl[q]);
  for (int p = 0; p < ni; ++p)
    for (int q = 0; q < ni; ++q) aii(p, q) = A(il[p], il[q]);
  return abb - abi * aii.inverse() * aib;
}

}  // namespace

TEST_CASE("family-1 spectrum: zero mode, nonnegativity, orthogonality") {
  Grid g = build_grid(2, 4);
  PermeabilityField kappa = random_kappa(g, 3);
  DgContext ctx(g, kappa, 16.0);
  SnapshotSpace snap = build_snapshot1(ctx, 2);
  EigenData e = solve_spectral1(ctx, snap);

  REQUIRE(e.count() == g.boundary_per_block());
  CHECK(e.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(e.eigenvalues.minCoeff() >= 0.0);
  for (int k = 0; k + 1 < e.count(); ++k)
    CHECK(e.eigenvalues[k] <= e.eigenvalues[k + 1] + 1e-14);

  // Constant eigenfunction for the zero eigenvalue.
  const Eigen::VectorXd v0 = e.eigenvectors.col(0);
  CHECK((v0.array() - v0[0]).abs().maxCoeff() < 1e-8 * std::abs(v0[0]));

  // Orthonormal in the V1 mass, orthogonal in the stiffness.
  const Eigen::MatrixXd m = v1_mass(ctx, snap);
  const Eigen::MatrixXd a = v1_stiffness(ctx, snap);
  const Eigen::MatrixXd gram = e.eigenvectors.transpose() * m * e.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(e.count(), e.count())).cwiseAbs().maxCoeff() <
        1e-8);
  Eigen::MatrixXd agram = e.eigenvectors.transpose() * a * e.eigenvectors;
  for (int i = 0; i < e.count(); ++i) agram(i, i) -= e.eigenvalues[i];
  CHECK(agram.cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, e.eigenvalues.maxCoeff()));
}

TEST_CASE("family-1 spectrum matches a dense generalized eigensolve") {
  Grid g = build_grid(2, 4);
  PermeabilityField kappa = constant_field(g, 1.0);
  DgContext ctx(g, kappa, 16.0);
  SnapshotSpace snap = build_snapshot1(ctx, 1);
  EigenData e = solve_spectral1(ctx, snap);

  const Eigen::MatrixXd schur = dense_schur(ctx, 1);
  Eigen::MatrixXd mass = ctx.kappa_tilde(1) / g.H() * ctx.geometry().boundary_mass;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(schur, mass);
  REQUIRE(es.info() == Eigen::Success);
  for (int k = 0; k < e.count(); ++k)
    CHECK(e.eigenvalues[k] ==
          doctest::Approx(std::max(es.eigenvalues()[k], 0.0)).epsilon(1e-8));
}

TEST_CASE("family-2 spectrum approximates the continuum Dirichlet eigenvalue") {
  // kappa = 1 on a single block: lambda_{2,1} -> 2 pi^2, within a few percent
  // at nf = 32.
  Grid g = build_grid(1, 32);
  PermeabilityField kappa = constant_field(g, 1.0);
  DgContext ctx(g, kappa, 16.0);
  EigenData e = solve_spectral2(ctx, 0, 4);
  CHECK(e.count() == 4);
  CHECK(e.eigenvalues[0] == doctest::Approx(2.0 * M_PI * M_PI).epsilon(0.02));
  // Eigenfunctions vanish on the boundary by construction (interior coords).
}

TEST_CASE("family-2 eigenvalues are H- and scale-invariant") {
  PermeabilityField k1, k2;
  Grid a = build_grid(1, 8, Rect{0, 0, 1, 1});
  Grid b = build_grid(1, 8, Rect{0, 0, 2, 2});
  k1 = constant_field(a, 1.0);
  k2 = constant_field(b, 1.0);
  DgContext ca(a, k1, 16.0), cb(b, k2, 16.0);
  EigenData ea = solve_spectral2(ca, 0, 6);
  EigenData eb = solve_spectral2(cb, 0, 6);
  for (int k = 0; k < 6; ++k)
    CHECK(ea.eigenvalues[k] == doctest::Approx(eb.eigenvalues[k]).epsilon(1e-9));

  // kappa -> c kappa leaves family-2 eigenvalues unchanged.
  PermeabilityField k5 = constant_field(a, 5.0);
  DgContext c5(a, k5, 16.0);
  EigenData e5 = solve_spectral2(c5, 0, 6);
  for (int k = 0; k < 6; ++k)
    CHECK(e5.eigenvalues[k] == doctest::Approx(ea.eigenvalues[k]).epsilon(1e-9));
}

TEST_CASE("offline space bookkeeping and DOF counts") {
  // Reference layout: 16x16 blocks with 4 family-1 functions each gives DOF 1024.
  Grid g = build_grid(16, 4);
  PermeabilityField kappa = constant_field(g, 1.0);
  DgContext ctx(g, kappa, 16.0);
  MultiscaleSpace space = MultiscaleSpace::build(ctx);
  OfflineState st = OfflineState::initial(g.num_blocks(), 4, 0);
  CHECK(st.dof() == 1024);
  OfflineBasis ob = build_offline_space(ctx, space, st);
  CHECK(ob.basis.size() == 1024);
  CHECK(ob.tags.size() == 1024);

  // Family-1-only offline functions are discrete-harmonic.
  for (int c = 0; c < 8; ++c) {
    const auto& col = ob.basis.columns[c];
    Eigen::VectorXd r = ctx.block(ob.basis.block_of[c]).stiffness() * col;
    for (int i : g.interior_locals()) CHECK(std::abs(r[i]) < 1e-9);
  }

  OfflineState bad = st;
  bad.active1[0].push_back(space.eig1[0].count());
  CHECK_THROWS(build_offline_space(ctx, space, bad));

  CHECK(OfflineState::first_inactive({0, 1, 2}, 8) == 3);
  CHECK(OfflineState::first_inactive({0, 2, 3}, 8) == 1);
  CHECK(OfflineState::first_inactive({1, 2}, 8) == 0);
  CHECK(OfflineState::first_inactive({0, 1}, 2) == -1);
}

TEST_CASE("projection bound: exact truncation, saturation, random draws") {
  Grid g = build_grid(2, 4);
  PermeabilityField kappa = random_kappa(g, 77);
  DgContext ctx(g, kappa, 16.0);
  MultiscaleSpace space = MultiscaleSpace::build(ctx, false, 1, 40, 9);
  const int block = 3;
  const SnapshotSpace& snap = space.snap1[block];
  const EigenData& e1 = space.eig1[block];
  const EigenData& e2 = space.family2(ctx, block);

  // Eigenfunction k < l projects exactly.
  {
    auto [resid, bound] = projection_diagnostics(ctx, snap, e1, e1.eigenvectors.col(1), 3);
    CHECK(resid < 1e-6);
    (void)bound;
  }
  // v = eigenfunction l+1: the bound is tight (both sides 1 after
  // normalization).
  {
    auto [resid, bound] = projection_diagnostics(ctx, snap, e1, e1.eigenvectors.col(3), 3);
    CHECK(resid == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(bound == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK_THROWS(projection_diagnostics(ctx, snap, e1, e1.eigenvectors.col(0), e1.count()));

  std::mt19937_64 rng(15);
  for (const EigenData* e : {&e1, &e2}) {
    const int dim = e->family == 1 ? snap.count() : g.interior_per_block();
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::VectorXd v(dim);
      for (int i = 0; i < dim; ++i) v[i] = (rng() >> 11) * 0x1p-53 - 0.5;
      for (int l = 0; l < e->count(); ++l) {
        auto [resid, bound] = projection_diagnostics(
            ctx, snap, *e, v, l);
        CHECK(resid <= bound * (1 + 1e-9) + 1e-12);
      }
    }
  }
}
