#include "gmsdg/dg_form.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "gmsdg/parallel.hpp"

namespace gmsdg {

DgContext::DgContext(const Grid& grid, const PermeabilityField& kappa, double gamma)
    : grid_(&grid), kappa_(&kappa), gamma_(gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("dg_form: gamma must be positive");
  geom_ = build_block_geometry(grid);
  const int n = grid.num_blocks();
  ops_.resize(n);
  parallel_for(n, [&](int i) {
    ops_[i] = std::make_unique<BlockOperators>(grid, kappa, i, geom_);
  });

  kappa_bar_.resize(grid.num_edges());
  for (int e = 0; e < grid.num_edges(); ++e) {
    const CoarseEdge& ce = grid.edge(e);
    kappa_bar_[e] = ce.boundary ? ops_[ce.plus_block]->kappa_max()
                                : 0.5 * (ops_[ce.plus_block]->kappa_max() +
                                         ops_[ce.minus_block]->kappa_max());
  }
  kappa_tilde_.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int e : grid.block_edges(i))
      kappa_tilde_[i] = std::max(kappa_tilde_[i], kappa_bar_[e]);
}

void DgContext::set_gamma(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("dg_form: gamma must be positive");
  gamma_ = gamma;
}

double DgContext::c_kappa() const {
  double c = 1.0;
  for (int i = 0; i < grid_->num_blocks(); ++i) {
    double lo = kappa_tilde_[i], hi = 0.0;
    for (int e : grid_->block_edges(i)) {
      lo = std::min(lo, kappa_bar_[e]);
      hi = std::max(hi, kappa_bar_[e]);
    }
    c = std::max(c, hi / lo);
  }
  return c;
}

DgContext::SideInfo DgContext::side_info(int edge, int s) const {
  const CoarseEdge& e = grid_->edge(edge);
  if (s == 0) return {e.plus_block, e.plus_side, 1.0, e.boundary ? 1.0 : 0.5};
  return {e.minus_block, e.minus_side, -1.0, 0.5};
}

void DgContext::edge_traces(const FineField& u, int edge, Eigen::VectorXd& jump,
                            Eigen::VectorXd& flux_avg) const {
  const int ne = grid_->fine_per_block() + 1;
  jump = Eigen::VectorXd::Zero(ne);
  flux_avg = Eigen::VectorXd::Zero(ne);
  for (int s = 0; s < num_sides(edge); ++s) {
    const SideInfo info = side_info(edge, s);
    const BlockOperators& ops = *ops_[info.block];
    Eigen::VectorXd t = ops.trace_of(block_segment(u, info.block));
    Eigen::VectorXd c = ops.flux_op() * t;
    const auto& pos = grid_->side_positions(info.side);
    for (int k = 0; k < ne; ++k) {
      jump[k] += info.jump_sign * t[pos[k]];
      flux_avg[k] += info.avg_weight * info.jump_sign * c[pos[k]];
    }
  }
}

double DgContext::volume_form(const FineField& u, const FineField& v) const {
  double total = 0.0;
  for (int i = 0; i < grid_->num_blocks(); ++i)
    total += block_segment(u, i).dot(ops_[i]->stiffness() * block_segment(v, i));
  return total;
}

double DgContext::l2_inner(const FineField& u, const FineField& v) const {
  double total = 0.0;
  for (int i = 0; i < grid_->num_blocks(); ++i)
    total += block_segment(u, i).dot(geom_.mass * block_segment(v, i));
  return total;
}

double DgContext::evaluate(const FineField& u, const FineField& v) const {
  double total = volume_form(u, v);
  Eigen::VectorXd ju, au, jv, av;
  for (int e = 0; e < grid_->num_edges(); ++e) {
    edge_traces(u, e, ju, au);
    edge_traces(v, e, jv, av);
    const Eigen::MatrixXd& me = edge_mass(e);
    const double pen = gamma_ / grid_->edge_h(grid_->edge(e)) * kappa_bar_[e];
    total += -(au.dot(me * jv) + av.dot(me * ju)) + pen * ju.dot(me * jv);
  }
  return total;
}

double DgContext::dg_norm_sq(const FineField& u) const {
  double total = volume_form(u, u);
  Eigen::VectorXd ju, au;
  for (int e = 0; e < grid_->num_edges(); ++e) {
    edge_traces(u, e, ju, au);
    const double pen = gamma_ / grid_->edge_h(grid_->edge(e)) * kappa_bar_[e];
    total += pen * ju.dot(edge_mass(e) * ju);
  }
  return total;
}

double DgContext::edge_quadratic_terms(const FineField& u, int edge) const {
  Eigen::VectorXd ju, au;
  edge_traces(u, edge, ju, au);
  const Eigen::VectorXd mju = edge_mass(edge) * ju;
  const double pen = gamma_ / grid_->edge_h(grid_->edge(edge)) * kappa_bar_[edge];
  return -2.0 * au.dot(mju) + pen * ju.dot(mju);
}

FineField DgContext::apply(const FineField& u) const {
  FineField y = FineField::Zero(field_size());
  for (int i = 0; i < grid_->num_blocks(); ++i)
    block_segment(y, i) += ops_[i]->stiffness() * block_segment(u, i);

  const int ne = grid_->fine_per_block() + 1;
  const int npb = grid_->nodes_per_block();
  const auto& bl = grid_->boundary_locals();
  Eigen::VectorXd ju, au;
  for (int e = 0; e < grid_->num_edges(); ++e) {
    edge_traces(u, e, ju, au);
    const Eigen::MatrixXd& me = edge_mass(e);
    const Eigen::VectorXd mju = me * ju;
    const Eigen::VectorXd mau = me * au;
    const double pen = gamma_ / grid_->edge_h(grid_->edge(e)) * kappa_bar_[e];
    for (int s = 0; s < num_sides(e); ++s) {
      const SideInfo info = side_info(e, s);
      const auto& pos = grid_->side_positions(info.side);
      const Eigen::MatrixXd& C = ops_[info.block]->flux_op();
      const Eigen::Index off = static_cast<Eigen::Index>(info.block) * npb;
      for (int k = 0; k < ne; ++k)
        y[off + bl[pos[k]]] += info.jump_sign * (pen * mju[k] - mau[k]);
      // -int_E {flux_v}[u] for nodal v on this side.
      for (int k = 0; k < ne; ++k) {
        const double w = -info.avg_weight * info.jump_sign * mju[k];
        if (w == 0.0) continue;
        for (int r = 0; r < 4 * grid_->fine_per_block(); ++r)
          y[off + bl[r]] += w * C(pos[k], r);
      }
    }
  }
  return y;
}

Eigen::VectorXd DgContext::rhs_fine(const Problem& p) const {
  if (p.manufactured) return apply(*p.manufactured);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(field_size());
  if (p.f_cells.size() > 0)
    for (int i = 0; i < grid_->num_blocks(); ++i)
      block_segment(rhs, i) += ops_[i]->load_vector(p.f_cells);
  if (p.g) {
    const int ne = grid_->fine_per_block() + 1;
    const int npb = grid_->nodes_per_block();
    const auto& bl = grid_->boundary_locals();
    for (int e = 0; e < grid_->num_edges(); ++e) {
      if (!grid_->edge(e).boundary) continue;
      const SideInfo info = side_info(e, 0);
      const auto& pos = grid_->side_positions(info.side);
      Eigen::VectorXd ge(ne);
      for (int k = 0; k < ne; ++k) {
        auto [x, y] = grid_->node_xy(info.block, bl[pos[k]]);
        ge[k] = p.g(x, y);
      }
      const Eigen::VectorXd mge = edge_mass(e) * ge;
      const double pen = gamma_ / grid_->edge_h(grid_->edge(e)) * kappa_bar_[e];
      const Eigen::MatrixXd& C = ops_[info.block]->flux_op();
      const Eigen::Index off = static_cast<Eigen::Index>(info.block) * npb;
      for (int k = 0; k < ne; ++k) rhs[off + bl[pos[k]]] += pen * mge[k];
      for (int k = 0; k < ne; ++k) {
        if (mge[k] == 0.0) continue;
        for (int r = 0; r < 4 * grid_->fine_per_block(); ++r)
          rhs[off + bl[r]] -= mge[k] * C(pos[k], r);
      }
    }
  }
  return rhs;
}

Eigen::SparseMatrix<double> DgContext::assemble_fine() const {
  const int npb = grid_->nodes_per_block();
  const int nb = grid_->boundary_per_block();
  const int ne = grid_->fine_per_block() + 1;
  const auto& bl = grid_->boundary_locals();
  std::vector<Eigen::Triplet<double>> trip;

  for (int i = 0; i < grid_->num_blocks(); ++i) {
    const auto& A = ops_[i]->stiffness();
    const int off = i * npb;
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
        trip.emplace_back(off + static_cast<int>(it.row()), off + static_cast<int>(it.col()),
                          it.value());
  }

  for (int e = 0; e < grid_->num_edges(); ++e) {
    const Eigen::MatrixXd& me = edge_mass(e);
    const double pen = gamma_ / grid_->edge_h(grid_->edge(e)) * kappa_bar_[e];
    const int ns = num_sides(e);
    // V_s = M_E * C_s(pos_s, :) per side.
    std::vector<Eigen::MatrixXd> v(ns);
    for (int s = 0; s < ns; ++s) {
      const SideInfo info = side_info(e, s);
      const auto& pos = grid_->side_positions(info.side);
      const Eigen::MatrixXd& C = ops_[info.block]->flux_op();
      Eigen::MatrixXd cpos(ne, nb);
      for (int a = 0; a < ne; ++a) cpos.row(a) = C.row(pos[a]);
      v[s] = me * cpos;
    }
    for (int sx = 0; sx < ns; ++sx) {
      const SideInfo x = side_info(e, sx);
      const auto& posx = grid_->side_positions(x.side);
      const int offx = x.block * npb;
      for (int sy = 0; sy < ns; ++sy) {
        const SideInfo y = side_info(e, sy);
        const auto& posy = grid_->side_positions(y.side);
        const int offy = y.block * npb;
        for (int a = 0; a < ne; ++a)
          for (int b = 0; b < ne; ++b)
            trip.emplace_back(offx + bl[posx[a]], offy + bl[posy[b]],
                              pen * x.jump_sign * y.jump_sign * me(a, b));
        // -int_E {flux_u from x}[v from y]; the one-sided average carries the
        // side's orientation sign as well.
        for (int b = 0; b < ne; ++b)
          for (int r = 0; r < nb; ++r)
            trip.emplace_back(offx + bl[r], offy + bl[posy[b]],
                              -x.avg_weight * x.jump_sign * y.jump_sign * v[sx](b, r));
        // -int_E {flux_v from y}[u from x]
        for (int a = 0; a < ne; ++a)
          for (int r = 0; r < nb; ++r)
            trip.emplace_back(offx + bl[posx[a]], offy + bl[r],
                              -y.avg_weight * y.jump_sign * x.jump_sign * v[sy](a, r));
      }
    }
  }

  const int n = field_size();
  Eigen::SparseMatrix<double> S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

DGSystem DgContext::assemble(const Basis& basis, const Problem& p) const {
  const int m = basis.size();
  if (m == 0) throw std::invalid_argument("dg_form: empty basis");
  const int npb = grid_->nodes_per_block();
  for (int c = 0; c < m; ++c)
    if (basis.columns[c].size() != npb)
      throw std::invalid_argument("dg_form: basis column has wrong size");

  DGSystem sys;
  sys.gamma = gamma_;
  sys.basis_block = basis.block_of;
  sys.matrix = Eigen::MatrixXd::Zero(m, m);
  sys.rhs = Eigen::VectorXd::Zero(m);

  // Per-column traces, flux coefficients and stiffness actions.
  std::vector<Eigen::VectorXd> trace(m), fluxc(m), acol(m);
  parallel_for(m, [&](int c) {
    const BlockOperators& ops = *ops_[basis.block_of[c]];
    trace[c] = ops.trace_of(basis.columns[c]);
    fluxc[c] = ops.flux_op() * trace[c];
    acol[c] = ops.stiffness() * basis.columns[c];
  });

  for (int i = 0; i < grid_->num_blocks(); ++i) {
    const auto& ids = basis.by_block[i];
    for (int pdx : ids)
      for (int qdx : ids) sys.matrix(pdx, qdx) += basis.columns[pdx].dot(acol[qdx]);
  }

  const int ne = grid_->fine_per_block() + 1;
  for (int e = 0; e < grid_->num_edges(); ++e) {
    const Eigen::MatrixXd& me = edge_mass(e);
    const double pen = gamma_ / grid_->edge_h(grid_->edge(e)) * kappa_bar_[e];
    const int ns = num_sides(e);
    for (int sx = 0; sx < ns; ++sx) {
      const SideInfo x = side_info(e, sx);
      const auto& posx = grid_->side_positions(x.side);
      const auto& idsx = basis.by_block[x.block];
      if (idsx.empty()) continue;
      Eigen::MatrixXd tx(ne, idsx.size()), cxm(ne, idsx.size());
      for (size_t c = 0; c < idsx.size(); ++c)
        for (int k = 0; k < ne; ++k) {
          tx(k, c) = trace[idsx[c]][posx[k]];
          cxm(k, c) = fluxc[idsx[c]][posx[k]];
        }
      for (int sy = 0; sy < ns; ++sy) {
        const SideInfo y = side_info(e, sy);
        const auto& posy = grid_->side_positions(y.side);
        const auto& idsy = basis.by_block[y.block];
        if (idsy.empty()) continue;
        Eigen::MatrixXd ty(ne, idsy.size()), cym(ne, idsy.size());
        for (size_t c = 0; c < idsy.size(); ++c)
          for (int k = 0; k < ne; ++k) {
            ty(k, c) = trace[idsy[c]][posy[k]];
            cym(k, c) = fluxc[idsy[c]][posy[k]];
          }
        const Eigen::MatrixXd mety = me * ty;
        const Eigen::MatrixXd mecy = me * cym;
        Eigen::MatrixXd contrib =
            -x.avg_weight * x.jump_sign * y.jump_sign * (cxm.transpose() * mety) -
            y.avg_weight * y.jump_sign * x.jump_sign * (tx.transpose() * mecy) +
            pen * x.jump_sign * y.jump_sign * (tx.transpose() * mety);
        for (size_t pc = 0; pc < idsx.size(); ++pc)
          for (size_t qc = 0; qc < idsy.size(); ++qc)
            sys.matrix(idsx[pc], idsy[qc]) += contrib(pc, qc);
      }
    }
  }

  const Eigen::VectorXd rhsg = rhs_fine(p);
  for (int c = 0; c < m; ++c)
    sys.rhs[c] = basis.columns[c].dot(block_segment(rhsg, basis.block_of[c]));
  return sys;
}

Eigen::VectorXd DgContext::local_action_f1(const FineField& u, int block) const {
  const BlockOperators& ops = *ops_[block];
  Eigen::VectorXd out = ops.harmonic_stiffness() * ops.trace_of(block_segment(u, block));
  const int ne = grid_->fine_per_block() + 1;
  const int nb = grid_->boundary_per_block();
  Eigen::VectorXd ju, au;
  for (int e : grid_->block_edges(block)) {
    edge_traces(u, e, ju, au);
    const Eigen::MatrixXd& me = edge_mass(e);
    const Eigen::VectorXd mju = me * ju;
    const Eigen::VectorXd mau = me * au;
    const double pen = gamma_ / grid_->edge_h(grid_->edge(e)) * kappa_bar_[e];
    const CoarseEdge& ce = grid_->edge(e);
    const int s = (ce.plus_block == block) ? 0 : 1;
    const SideInfo info = side_info(e, s);
    const auto& pos = grid_->side_positions(info.side);
    const Eigen::MatrixXd& C = ops.flux_op();
    for (int k = 0; k < ne; ++k)
      out[pos[k]] += info.jump_sign * (pen * mju[k] - mau[k]);
    for (int k = 0; k < ne; ++k) {
      const double w = -info.avg_weight * info.jump_sign * mju[k];
      if (w == 0.0) continue;
      for (int r = 0; r < nb; ++r) out[r] += w * C(pos[k], r);
    }
  }
  return out;
}

Eigen::VectorXd DgContext::local_action_f2(const FineField& u, int block) const {
  const BlockOperators& ops = *ops_[block];
  return ops.restrict_interior(ops.stiffness() * block_segment(u, block));
}

Eigen::VectorXd DgContext::local_rhs_f1(const Eigen::VectorXd& rhs_global, int block) const {
  return ops_[block]->harmonic_load(block_segment(rhs_global, block));
}

Eigen::VectorXd DgContext::local_rhs_f2(const Eigen::VectorXd& rhs_global, int block) const {
  return ops_[block]->restrict_interior(block_segment(rhs_global, block));
}

double a_norm(const DGSystem& system, const Eigen::VectorXd& coefficients) {
  const double q = coefficients.dot(system.matrix * coefficients);
  const double scale = system.matrix.cwiseAbs().maxCoeff() *
                       coefficients.squaredNorm();
  if (q < -1e-10 * (scale > 0 ? scale : 1.0))
    throw std::runtime_error("dg_form: negative energy; gamma below coercivity threshold");
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace gmsdg
