#include "gmsdg/local_fem.hpp"

#include <stdexcept>
#include <vector>

namespace gmsdg {

namespace {

// P1 element matrices of the two triangles splitting an hx-by-hy cell along
// the lower-left to upper-right diagonal. Triangle 1: (0,0),(hx,0),(hx,hy);
// triangle 2: (0,0),(hx,hy),(0,hy). Unit-kappa stiffness and unit mass.
struct CellTemplates {
  Eigen::Matrix3d K1, K2, M1, M2;
  std::array<int, 3> off1, off2;  // node offsets as (dx, dy) pairs flattened below
  double area;                    // per-triangle area
};

Eigen::Matrix3d tri_stiffness(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                              const Eigen::Vector2d& p2) {
  const double area2 = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                       (p2.x() - p0.x()) * (p1.y() - p0.y());
  Eigen::Matrix<double, 2, 3> b;
  b.col(0) << p1.y() - p2.y(), p2.x() - p1.x();
  b.col(1) << p2.y() - p0.y(), p0.x() - p2.x();
  b.col(2) << p0.y() - p1.y(), p1.x() - p0.x();
  return (b.transpose() * b) / (2.0 * area2);
}

CellTemplates cell_templates(double hx, double hy) {
  CellTemplates t;
  Eigen::Vector2d n00(0, 0), n10(hx, 0), n01(0, hy), n11(hx, hy);
  t.K1 = tri_stiffness(n00, n10, n11);
  t.K2 = tri_stiffness(n00, n11, n01);
  t.area = 0.5 * hx * hy;
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  t.M1 = t.M2 = (t.area / 12.0) * m;
  return t;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

template <typename CellWeight>
void assemble_block(const Grid& g, CellWeight&& w, const Eigen::Matrix3d& E1,
                    const Eigen::Matrix3d& E2, Triplets& out) {
  const int nf = g.fine_per_block();
  for (int cy = 0; cy < nf; ++cy)
    for (int cx = 0; cx < nf; ++cx) {
      const double k = w(cx, cy);
      const int n00 = g.local_node(cx, cy);
      const int n10 = g.local_node(cx + 1, cy);
      const int n01 = g.local_node(cx, cy + 1);
      const int n11 = g.local_node(cx + 1, cy + 1);
      const std::array<int, 3> t1{n00, n10, n11};
      const std::array<int, 3> t2{n00, n11, n01};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          out.emplace_back(t1[i], t1[j], k * E1(i, j));
          out.emplace_back(t2[i], t2[j], k * E2(i, j));
        }
    }
}

void check_kappa(const Grid& g, const PermeabilityField& kappa, int block) {
  const int nf = g.fine_per_block();
  for (int cy = 0; cy < nf; ++cy)
    for (int cx = 0; cx < nf; ++cx)
      if (!(kappa.block_cell(g, block, cx, cy) > 0.0))
        throw std::invalid_argument("local_fem: nonpositive kappa value");
}

}  // namespace

BlockGeometry build_block_geometry(const Grid& g) {
  BlockGeometry geom;
  const int nf = g.fine_per_block();
  const int nb = g.boundary_per_block();

  auto t = cell_templates(g.hx(), g.hy());
  Triplets trip;
  trip.reserve(static_cast<size_t>(nf) * nf * 18);
  assemble_block(g, [](int, int) { return 1.0; }, t.M1, t.M2, trip);
  geom.mass.resize(g.nodes_per_block(), g.nodes_per_block());
  geom.mass.setFromTriplets(trip.begin(), trip.end());

  geom.boundary_mass = Eigen::MatrixXd::Zero(nb, nb);
  for (int p = 0; p < nb; ++p) {
    const int q = (p + 1) % nb;
    // Segment p->p+1 runs along x on the south/north stretches, along y on
    // east/west.
    const double len = (p < nf || (p >= 2 * nf && p < 3 * nf)) ? g.hx() : g.hy();
    geom.boundary_mass(p, p) += len / 3.0;
    geom.boundary_mass(q, q) += len / 3.0;
    geom.boundary_mass(p, q) += len / 6.0;
    geom.boundary_mass(q, p) += len / 6.0;
  }
  geom.boundary_llt.compute(geom.boundary_mass);

  auto edge_mass = [nf](double len) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
    for (int s = 0; s < nf; ++s) {
      m(s, s) += len / 3.0;
      m(s + 1, s + 1) += len / 3.0;
      m(s, s + 1) += len / 6.0;
      m(s + 1, s) += len / 6.0;
    }
    return m;
  };
  geom.edge_mass_x = edge_mass(g.hx());
  geom.edge_mass_y = edge_mass(g.hy());
  geom.perimeter = 2.0 * nf * (g.hx() + g.hy());
  geom.block_area = g.Hx() * g.Hy();
  return geom;
}

Eigen::SparseMatrix<double> local_stiffness(const Grid& g, const PermeabilityField& kappa,
                                            int block) {
  check_kappa(g, kappa, block);
  auto t = cell_templates(g.hx(), g.hy());
  Triplets trip;
  const int nf = g.fine_per_block();
  trip.reserve(static_cast<size_t>(nf) * nf * 18);
  assemble_block(
      g, [&](int cx, int cy) { return kappa.block_cell(g, block, cx, cy); }, t.K1, t.K2, trip);
  Eigen::SparseMatrix<double> A(g.nodes_per_block(), g.nodes_per_block());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::SparseMatrix<double> weighted_mass_full(const Grid& g, const PermeabilityField& kappa,
                                               int block) {
  check_kappa(g, kappa, block);
  auto t = cell_templates(g.hx(), g.hy());
  Triplets trip;
  assemble_block(
      g, [&](int cx, int cy) { return kappa.block_cell(g, block, cx, cy); }, t.M1, t.M2, trip);
  Eigen::SparseMatrix<double> M(g.nodes_per_block(), g.nodes_per_block());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::SparseMatrix<double> weighted_mass_interior(const Grid& g,
                                                   const PermeabilityField& kappa, int block) {
  Eigen::SparseMatrix<double> M = weighted_mass_full(g, kappa, block);
  const auto& interior = g.interior_locals();
  std::vector<int> pos(g.nodes_per_block(), -1);
  for (int i = 0; i < static_cast<int>(interior.size()); ++i) pos[interior[i]] = i;
  Triplets trip;
  for (int k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0)
        trip.emplace_back(pos[it.row()], pos[it.col()], it.value());
  Eigen::SparseMatrix<double> Mi(interior.size(), interior.size());
  Mi.setFromTriplets(trip.begin(), trip.end());
  return Mi;
}

Eigen::MatrixXd weighted_mass_boundary(const Grid& g, const std::array<double, 4>& w) {
  for (double v : w)
    if (!(v > 0.0)) throw std::invalid_argument("local_fem: nonpositive boundary weight");
  const int nf = g.fine_per_block();
  const int nb = g.boundary_per_block();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nb, nb);
  for (int p = 0; p < nb; ++p) {
    const int q = (p + 1) % nb;
    const int side = p / nf;  // 0=S,1=E,2=N,3=W by loop construction
    const double len = (side == 0 || side == 2) ? g.hx() : g.hy();
    const double s = w[static_cast<size_t>(side)];
    M(p, p) += s * len / 3.0;
    M(q, q) += s * len / 3.0;
    M(p, q) += s * len / 6.0;
    M(q, p) += s * len / 6.0;
  }
  return M;
}

Eigen::VectorXd block_load_vector(const Grid& g, const Eigen::VectorXd& f_cells, int block) {
  const int nf = g.fine_per_block();
  auto [bx, by] = g.block_coords(block);
  const int n = g.cells_per_axis();
  Eigen::VectorXd L = Eigen::VectorXd::Zero(g.nodes_per_block());
  const double area3 = 0.5 * g.hx() * g.hy() / 3.0;
  for (int cy = 0; cy < nf; ++cy)
    for (int cx = 0; cx < nf; ++cx) {
      const double f = f_cells[(by * nf + cy) * n + bx * nf + cx];
      if (f == 0.0) continue;
      const int n00 = g.local_node(cx, cy);
      const int n10 = g.local_node(cx + 1, cy);
      const int n01 = g.local_node(cx, cy + 1);
      const int n11 = g.local_node(cx + 1, cy + 1);
      // triangle (n00,n10,n11) and (n00,n11,n01)
      L[n00] += 2 * f * area3;
      L[n10] += f * area3;
      L[n11] += 2 * f * area3;
      L[n01] += f * area3;
    }
  return L;
}

BlockOperators::BlockOperators(const Grid& g, const PermeabilityField& kappa, int block,
                               const BlockGeometry& geom)
    : grid_(&g), geom_(&geom), block_(block) {
  A_ = local_stiffness(g, kappa, block);
  kappa_max_ = kappa.max_on_block(g, block);
  M_int_ = weighted_mass_interior(g, kappa, block);

  const auto& interior = g.interior_locals();
  const int ni = static_cast<int>(interior.size());
  std::vector<int> pos(g.nodes_per_block(), -1);
  for (int i = 0; i < ni; ++i) pos[interior[i]] = i;
  Triplets trip;
  for (int k = 0; k < A_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A_, k); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0)
        trip.emplace_back(pos[it.row()], pos[it.col()], it.value());
  A_int_.resize(ni, ni);
  A_int_.setFromTriplets(trip.begin(), trip.end());
  interior_llt_.compute(A_int_);
  if (interior_llt_.info() != Eigen::Success)
    throw std::runtime_error("local_fem: interior stiffness factorization failed");

  // Boundary Schur complement, one interior solve per boundary node.
  const int nb = g.boundary_per_block();
  schur_.resize(nb, nb);
  Eigen::VectorXd trace = Eigen::VectorXd::Zero(nb);
  for (int k = 0; k < nb; ++k) {
    trace.setZero();
    trace[k] = 1.0;
    Eigen::VectorXd ext = harmonic_extend(trace);
    Eigen::VectorXd w = A_ * ext;
    for (int p = 0; p < nb; ++p) schur_(p, k) = w[g.boundary_locals()[p]];
  }
  schur_ = 0.5 * (schur_ + schur_.transpose().eval());
  flux_op_ = geom.boundary_llt.solve(schur_);
}

Eigen::VectorXd BlockOperators::trace_of(const Eigen::VectorXd& u) const {
  const auto& bl = grid_->boundary_locals();
  Eigen::VectorXd t(bl.size());
  for (int p = 0; p < static_cast<int>(bl.size()); ++p) t[p] = u[bl[p]];
  return t;
}

Eigen::VectorXd BlockOperators::restrict_interior(const Eigen::VectorXd& u) const {
  const auto& il = grid_->interior_locals();
  Eigen::VectorXd t(il.size());
  for (int p = 0; p < static_cast<int>(il.size()); ++p) t[p] = u[il[p]];
  return t;
}

Eigen::VectorXd BlockOperators::harmonic_extend(const Eigen::VectorXd& trace) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(grid_->nodes_per_block());
  const auto& bl = grid_->boundary_locals();
  for (int p = 0; p < static_cast<int>(bl.size()); ++p) u[bl[p]] = trace[p];
  Eigen::VectorXd r = A_ * u;
  Eigen::VectorXd ui = interior_llt_.solve(-restrict_interior(r));
  const auto& il = grid_->interior_locals();
  for (int p = 0; p < static_cast<int>(il.size()); ++p) u[il[p]] = ui[p];
  return u;
}

Eigen::VectorXd BlockOperators::normal_flux(const Eigen::VectorXd& u) const {
  return schur_ * trace_of(u);
}

Eigen::VectorXd BlockOperators::flux_coefficients(const Eigen::VectorXd& u) const {
  return flux_op_ * trace_of(u);
}

Eigen::VectorXd BlockOperators::solve_interior(const Eigen::VectorXd& rhs) const {
  return interior_llt_.solve(rhs);
}

Eigen::VectorXd BlockOperators::interior_mass_solve(const Eigen::VectorXd& rhs) const {
  if (!interior_mass_llt_) {
    auto* self = const_cast<BlockOperators*>(this);
    self->interior_mass_llt_ =
        std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(M_int_);
  }
  return interior_mass_llt_->solve(rhs);
}

Eigen::VectorXd BlockOperators::load_vector(const Eigen::VectorXd& f_cells) const {
  return block_load_vector(*grid_, f_cells, block_);
}

Eigen::VectorXd BlockOperators::harmonic_load(const Eigen::VectorXd& load) const {
  // (L, psi_k) with psi_k harmonic: boundary part plus extension-transposed
  // interior part, E^T L_I = -A_BI A_II^{-1} L_I.
  Eigen::VectorXd z = interior_llt_.solve(restrict_interior(load));
  Eigen::VectorXd zfull = Eigen::VectorXd::Zero(grid_->nodes_per_block());
  const auto& il = grid_->interior_locals();
  for (int p = 0; p < static_cast<int>(il.size()); ++p) zfull[il[p]] = z[p];
  Eigen::VectorXd w = A_ * zfull;
  const auto& bl = grid_->boundary_locals();
  Eigen::VectorXd out(bl.size());
  for (int p = 0; p < static_cast<int>(bl.size()); ++p) out[p] = load[bl[p]] - w[bl[p]];
  return out;
}

}  // namespace gmsdg
