#pragma once

#include <Eigen/Core>
#include <utility>

#include "gmsdg/dg_form.hpp"

namespace gmsdg {

struct Solution {
  enum class Space { Fine, Offline, Snapshot };
  Space space = Space::Fine;
  Eigen::VectorXd coefficients;  // basis coefficients; empty for fine solves
  FineField fine;                // fine-grid representation
};

/// Fine-grid reference solve of a_DG(u,v) = rhs(v) over the broken nodal
/// space. Direct sparse factorization at desk scale, preconditioned CG for
/// large systems.
Solution solve_fine(const DgContext& ctx, const Problem& p);

/// Galerkin solve in the given basis; fine representation materialized.
/// Falls back to a rank-revealing solve with a warning when the reduced
/// system is singular.
Solution solve_coarse(const DgContext& ctx, const Problem& p, const Basis& basis);

/// (e2, ea): relative L2 and energy errors of u against a reference.
std::pair<double, double> relative_errors(const DgContext& ctx, const Solution& u,
                                          const Solution& reference);

}  // namespace gmsdg
