#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "gmsdg/local_fem.hpp"

using namespace gmsdg;

namespace {

// Test-side dense P1 assembly written independently of the library path:
// explicit hat-function gradients per triangle.
Eigen::MatrixXd dense_stiffness_oracle(const Grid& g, const PermeabilityField& kappa,
                                       int block) {
  const int nf = g.fine_per_block();
  const int n = g.nodes_per_block();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const double hx = g.hx(), hy = g.hy();
  for (int cy = 0; cy < nf; ++cy)
    for (int cx = 0; cx < nf; ++cx) {
      const double k = kappa.block_cell(g, block, cx, cy);
      // Triangle (0,0)-(hx,0)-(hx,hy): hats 1-x/hx, x/hx-y/hy, y/hy.
      const Eigen::Vector2d gl[3] = {{-1 / hx, 0}, {1 / hx, -1 / hy}, {0, 1 / hy}};
      // Triangle (0,0)-(hx,hy)-(0,hy): hats 1-y/hy, x/hx, y/hy-x/hx.
      const Eigen::Vector2d gu[3] = {{0, -1 / hy}, {1 / hx, 0}, {-1 / hx, 1 / hy}};
      const int nl[3] = {g.local_node(cx, cy), g.local_node(cx + 1, cy),
                         g.local_node(cx + 1, cy + 1)};
      const int nu[3] = {g.local_node(cx, cy), g.local_node(cx + 1, cy + 1),
                         g.local_node(cx, cy + 1)};
      const double area = 0.5 * hx * hy;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          A(nl[i], nl[j]) += k * area * gl[i].dot(gl[j]);
          A(nu[i], nu[j]) += k * area * gu[i].dot(gu[j]);
        }
    }
  return A;
}

PermeabilityField random_kappa(const Grid& g, unsigned seed) {
  PermeabilityField f = constant_field(g, 1.0);
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < f.values.size(); ++i)
    f.values[i] = 1.0 + (rng() >> 11) * 0x1p-53 * 99.0;
  return f;
}

}  // namespace

TEST_CASE("unit-cell stiffness values from hand integration") {
  // Block of four unit cells; corner-cell entries isolate the single-cell
  // element matrix: diagonal 1, -1/2 along cell sides, 0 along the split
  // diagonal, 0 across the other diagonal.
  Grid g = build_grid(1, 2, Rect{0, 0, 2, 2});
  PermeabilityField kappa = constant_field(g, 1.0);
  Eigen::SparseMatrix<double> A = local_stiffness(g, kappa, 0);
  Eigen::MatrixXd D(A);
  const int n00 = g.local_node(0, 0);
  const int n10 = g.local_node(1, 0);
  const int n01 = g.local_node(0, 1);
  const int n11 = g.local_node(1, 1);
  CHECK(D(n00, n00) == doctest::Approx(1.0));
  CHECK(D(n00, n10) == doctest::Approx(-0.5));
  CHECK(D(n00, n01) == doctest::Approx(-0.5));
  CHECK(D(n00, n11) == doctest::Approx(0.0));  // split diagonal of the corner cell
  CHECK(D(n10, n01) == doctest::Approx(0.0));  // not adjacent
  CHECK(D(n11, n11) == doctest::Approx(4.0));  // interior of the 2x2 patch
}

TEST_CASE("stiffness is linear in kappa and kills constants") {
  Grid g = build_grid(2, 4);
  PermeabilityField one = constant_field(g, 1.0);
  PermeabilityField three = constant_field(g, 3.0);
  Eigen::MatrixXd a1(local_stiffness(g, one, 2));
  Eigen::MatrixXd a3(local_stiffness(g, three, 2));
  CHECK((a3 - 3.0 * a1).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.nodes_per_block());
  CHECK((a1 * ones).cwiseAbs().maxCoeff() < 1e-13);

  // Exact symmetry, independent of assembly order.
  Eigen::MatrixXd asym = a1 - a1.transpose();
  CHECK(asym.cwiseAbs().maxCoeff() == 0.0);

  PermeabilityField bad = constant_field(g, 1.0);
  bad.values[0] = 0.0;
  CHECK_THROWS(local_stiffness(g, bad, 0));
}

TEST_CASE("stiffness matches the dense oracle on random kappa") {
  Grid g = build_grid(2, 4, Rect{0, 0, 1, 2});
  PermeabilityField kappa = random_kappa(g, 7);
  for (int block : {0, 3}) {
    Eigen::MatrixXd lib(local_stiffness(g, kappa, block));
    Eigen::MatrixXd ora = dense_stiffness_oracle(g, kappa, block);
    CHECK((lib - ora).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mass matrices integrate constants") {
  Grid g = build_grid(2, 4);
  BlockGeometry geom = build_block_geometry(g);

  // Boundary-trace mass with unit weight integrates 1 to the perimeter.
  const Eigen::VectorXd ones_b = Eigen::VectorXd::Ones(g.boundary_per_block());
  CHECK(ones_b.dot(geom.boundary_mass * ones_b) == doctest::Approx(geom.perimeter));

  // Full kappa=1 mass integrates 1 to the block area H^2.
  PermeabilityField one = constant_field(g, 1.0);
  Eigen::SparseMatrix<double> M = weighted_mass_full(g, one, 0);
  const Eigen::VectorXd ones_n = Eigen::VectorXd::Ones(g.nodes_per_block());
  CHECK(ones_n.dot(M * ones_n) == doctest::Approx(g.Hx() * g.Hy()));

  // Doubling the weight doubles every entry.
  Eigen::MatrixXd m1 = weighted_mass_boundary(g, {1, 1, 1, 1});
  Eigen::MatrixXd m2 = weighted_mass_boundary(g, {2, 2, 2, 2});
  CHECK((m2 - 2.0 * m1).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS(weighted_mass_boundary(g, {1, 1, 0, 1}));

  PermeabilityField two = constant_field(g, 2.0);
  Eigen::MatrixXd mi1(weighted_mass_interior(g, one, 0));
  Eigen::MatrixXd mi2(weighted_mass_interior(g, two, 0));
  CHECK((mi2 - 2.0 * mi1).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("harmonic extension reproduces constants and linears") {
  Grid g = build_grid(2, 4);
  PermeabilityField one = constant_field(g, 1.0);
  BlockGeometry geom = build_block_geometry(g);
  BlockOperators ops(g, one, 1, geom);

  Eigen::VectorXd trace = Eigen::VectorXd::Constant(g.boundary_per_block(), 3.5);
  Eigen::VectorXd u = ops.harmonic_extend(trace);
  CHECK((u.array() - 3.5).abs().maxCoeff() < 1e-12);

  // Linear data: discrete-harmonic for constant kappa, so the extension is
  // the nodal interpolant.
  for (int p = 0; p < g.boundary_per_block(); ++p) {
    auto [x, y] = g.node_xy(1, g.boundary_locals()[p]);
    trace[p] = x;
  }
  u = ops.harmonic_extend(trace);
  for (int node = 0; node < g.nodes_per_block(); ++node) {
    auto [x, y] = g.node_xy(1, node);
    CHECK(u[node] == doctest::Approx(x).epsilon(1e-12));
  }

  // Interior residual vanishes.
  Eigen::VectorXd r = ops.stiffness() * u;
  for (int node : g.interior_locals()) CHECK(std::abs(r[node]) < 1e-12);
}

TEST_CASE("harmonic extension matches a dense interior solve") {
  Grid g = build_grid(1, 2);
  PermeabilityField kappa = random_kappa(g, 3);
  BlockGeometry geom = build_block_geometry(g);
  BlockOperators ops(g, kappa, 0, geom);
  Eigen::MatrixXd A = dense_stiffness_oracle(g, kappa, 0);

  // nf=2: a single interior node; solve the 1x1 interior system directly.
  const int center = g.interior_locals()[0];
  for (int corner : {0, 1}) {
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(8);
    trace[corner] = 1.0;
    Eigen::VectorXd u = ops.harmonic_extend(trace);
    double rhs = 0.0;
    for (int p = 0; p < 8; ++p) rhs -= A(center, g.boundary_locals()[p]) * trace[p];
    CHECK(u[center] == doctest::Approx(rhs / A(center, center)).epsilon(1e-12));
  }
}

TEST_CASE("normal flux: compatibility, zero on constants, boundary rows on harmonics") {
  Grid g = build_grid(2, 4);
  PermeabilityField kappa = random_kappa(g, 11);
  BlockGeometry geom = build_block_geometry(g);
  BlockOperators ops(g, kappa, 2, geom);

  Eigen::VectorXd c = Eigen::VectorXd::Constant(g.nodes_per_block(), 2.0);
  CHECK(ops.normal_flux(c).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd u(g.nodes_per_block());
    for (int i = 0; i < u.size(); ++i) u[i] = (rng() >> 11) * 0x1p-53 - 0.5;
    Eigen::VectorXd flux = ops.normal_flux(u);
    CHECK(std::abs(flux.sum()) < 1e-10);

    // For a discrete-harmonic u the flux functional is A u on boundary rows.
    Eigen::VectorXd uh = ops.harmonic_extend(ops.trace_of(u));
    Eigen::VectorXd w = ops.stiffness() * uh;
    Eigen::VectorXd fh = ops.normal_flux(uh);
    for (int p = 0; p < g.boundary_per_block(); ++p)
      CHECK(fh[p] == doctest::Approx(w[g.boundary_locals()[p]]).epsilon(1e-10));

    // Energy of the extension scales quadratically with the trace.
    const double e1 = uh.dot(ops.stiffness() * uh);
    Eigen::VectorXd u2 = ops.harmonic_extend(2.0 * ops.trace_of(u));
    CHECK(u2.dot(ops.stiffness() * u2) == doctest::Approx(4.0 * e1).epsilon(1e-10));
  }
}

TEST_CASE("harmonic load pairs loads with trace extensions") {
  Grid g = build_grid(2, 2);
  PermeabilityField kappa = random_kappa(g, 13);
  BlockGeometry geom = build_block_geometry(g);
  BlockOperators ops(g, kappa, 0, geom);
  std::mt19937_64 rng(17);
  Eigen::VectorXd load(g.nodes_per_block());
  for (int i = 0; i < load.size(); ++i) load[i] = (rng() >> 11) * 0x1p-53 - 0.5;
  const Eigen::VectorXd hl = ops.harmonic_load(load);
  for (int k = 0; k < g.boundary_per_block(); ++k) {
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(g.boundary_per_block());
    trace[k] = 1.0;
    CHECK(hl[k] == doctest::Approx(ops.harmonic_extend(trace).dot(load)).epsilon(1e-11));
  }
}
