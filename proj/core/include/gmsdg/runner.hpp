#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gmsdg/config.hpp"
#include "gmsdg/dg_form.hpp"
#include "gmsdg/solve.hpp"
#include "gmsdg/spectral.hpp"

namespace gmsdg {

/// Fully assembled experiment: grid, coefficient, operators, multiscale
/// spaces, the fine reference solve and the optional snapshot reference.
struct Workspace {
  RunConfig cfg;
  std::unique_ptr<Grid> grid;
  PermeabilityField kappa;
  Problem problem;
  std::unique_ptr<DgContext> ctx;
  MultiscaleSpace space;
  Solution fine;
  std::unique_ptr<Solution> snapshot_reference;
};

std::unique_ptr<Workspace> setup_workspace(const RunConfig& cfg);

/// Galerkin solve over the whole current snapshot space (the u_snap
/// reference).
Solution solve_snapshot_reference(const DgContext& ctx, const Problem& p,
                                  const MultiscaleSpace& space);

/// Output directory after the GMSDG_OUT override, created if needed.
std::string resolve_output_dir(const RunConfig& cfg);

/// The CLI verbs. All return a process exit status.
int run_experiment(const RunConfig& cfg);
int compare_experiments(const std::vector<RunConfig>& cfgs);
int diag_eigs(const RunConfig& cfg);
int generate_kappa(const RunConfig& cfg, const std::string& out_path);

}  // namespace gmsdg
