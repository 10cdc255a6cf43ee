#include "gmsdg/solve.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <stdexcept>

namespace gmsdg {

namespace {
// Above this size the fine solve switches to diagonally preconditioned CG;
// GMSDG_FINE_CG=1 forces the iterative path.
constexpr int kDirectLimit = 150000;

bool force_cg() {
  const char* env = std::getenv("GMSDG_FINE_CG");
  return env && env[0] == '1';
}
}  // namespace

Solution solve_fine(const DgContext& ctx, const Problem& p) {
  const Eigen::SparseMatrix<double> S = ctx.assemble_fine();
  const Eigen::VectorXd rhs = ctx.rhs_fine(p);
  Solution sol;
  sol.space = Solution::Space::Fine;

  bool solved = false;
  if (S.rows() <= kDirectLimit && !force_cg()) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(S);
    if (ldlt.info() == Eigen::Success) {
      sol.fine = ldlt.solve(rhs);
      solved = ldlt.info() == Eigen::Success;
    }
    if (!solved)
      throw std::runtime_error(
          "solve: fine factorization failed; gamma below coercivity threshold or invalid "
          "kappa");
  }
  if (!solved) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
        cg(S);
    cg.setTolerance(1e-10);
    cg.setMaxIterations(20000);
    sol.fine = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
      throw std::runtime_error("solve: fine CG did not converge");
  }
  return sol;
}

Solution solve_coarse(const DgContext& ctx, const Problem& p, const Basis& basis) {
  if (basis.size() == 0) throw std::invalid_argument("solve: empty basis");
  const DGSystem sys = ctx.assemble(basis, p);

  Solution sol;
  sol.space = Solution::Space::Offline;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.matrix);
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    sol.coefficients = ldlt.solve(sys.rhs);
    ok = sol.coefficients.allFinite() &&
         (sys.matrix * sol.coefficients - sys.rhs).norm() <=
             1e-8 * (sys.rhs.norm() + 1.0);
  }
  if (!ok) {
    std::cerr << "solve: singular reduced system, falling back to rank-revealing solve\n";
    sol.coefficients = sys.matrix.colPivHouseholderQr().solve(sys.rhs);
  }

  sol.fine = FineField::Zero(ctx.field_size());
  for (int c = 0; c < basis.size(); ++c)
    ctx.block_segment(sol.fine, basis.block_of[c]) += sol.coefficients[c] * basis.columns[c];
  return sol;
}

std::pair<double, double> relative_errors(const DgContext& ctx, const Solution& u,
                                          const Solution& reference) {
  const FineField diff = u.fine - reference.fine;
  const double ref_l2 = ctx.l2_inner(reference.fine, reference.fine);
  const double ref_a = ctx.evaluate(reference.fine, reference.fine);
  if (!(ref_l2 > 0.0) || !(ref_a > 0.0))
    throw std::invalid_argument("solve: zero reference norm");
  const double e2 = std::sqrt(std::max(ctx.l2_inner(diff, diff), 0.0) / ref_l2);
  const double ea = std::sqrt(std::max(ctx.evaluate(diff, diff), 0.0) / ref_a);
  return {e2, ea};
}

}  // namespace gmsdg
