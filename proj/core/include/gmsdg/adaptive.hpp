#pragma once

#include <Eigen/Core>
#include <vector>

#include "gmsdg/indicators.hpp"
#include "gmsdg/solve.hpp"
#include "gmsdg/spectral.hpp"

namespace gmsdg {

enum class Strategy { Adaptive, Uniform, ExactIndicator, Pursuit };

struct AdaptiveConfig {
  Strategy strategy = Strategy::Adaptive;
  Families families = Families::V1;
  double theta = 0.4;        // marking fraction (pursuit runs typically use 0.8)
  double delta0 = 0.75;      // eigenvalue-ratio target of the s-rule
  double remove_eps = 0.0;   // basis-removal tolerance; 0 disables
  int max_iter = 10;
  long dof_budget = 0;       // 0 = unbounded
  int l1_init = 4;
  int l2_init = 0;
  int uniform_k = 4;
};

struct ConvergenceRecord {
  int iteration = 0;
  long dof = 0;
  double e2 = 0.0;
  double ea = 0.0;
  double e2_snap = 0.0;  // NaN when no snapshot reference is configured
  double ea_snap = 0.0;
  double sum_eta2 = 0.0;
  int k_marked = 0;
  int n_added = 0;
  int n_removed = 0;
  double seconds = 0.0;
  bool converged = false;
};

/// Everything a strategy run needs; the fine solution is the error reference,
/// the snapshot solution an optional secondary reference.
struct StrategyContext {
  const DgContext* ctx = nullptr;
  const Problem* problem = nullptr;
  MultiscaleSpace* space = nullptr;
  const Solution* fine = nullptr;
  const Solution* snapshot_reference = nullptr;
  /// Called with each iteration's indicator set (eta-driven strategies only).
  std::function<void(int iteration, const IndicatorSet&)> on_indicators;
};

/// Final solved state of a strategy run, for exporting fields.
struct StrategyOutputs {
  OfflineState last_state;
  OfflineBasis last_basis;
  Solution last_solution;
};

/// Smallest k with sum of the first k values >= theta * total; 0 when the
/// total vanishes. Input must be sorted descending.
int dorfler_mark(const std::vector<double>& eta_sq_descending, double theta);

/// The s-rule: the smallest count s of next inactive eigenfunctions such that
/// the first eigenvalue left inactive afterwards is at least lambda_first/
/// delta0. Returns the indices to activate; all remaining ones when no such s
/// exists (the family is then exhausted).
std::vector<int> choose_s(const EigenData& eig, const std::vector<int>& active,
                          double delta0);

/// Inserts indices into a sorted active set (duplicates ignored); returns the
/// number actually added.
int activate_indices(std::vector<int>& active, const std::vector<int>& indices);

/// Step 5 of the removal algorithm: drops active eigenfunctions whose squared
/// solution coefficient is below eps times the block's total, keeping at
/// least one family-1 function per block. Returns the number removed.
int remove_basis(OfflineState& state, const OfflineBasis& basis,
                 const Eigen::VectorXd& coefficients, double eps);

/// One standard adaptive step: solve, indicators, Dorfler marking, s-rule
/// enrichment, optional removal. Returns the enriched state and fills the
/// record for the solved state.
OfflineState adaptive_step(const StrategyContext& sc, const AdaptiveConfig& cfg,
                           const OfflineState& state, ConvergenceRecord& rec);

/// One basis-pursuit step: correlate all inactive candidates with the
/// residual, add every candidate with zeta >= theta * zeta_max, then remove.
OfflineState pursuit_step(const StrategyContext& sc, const AdaptiveConfig& cfg,
                          const OfflineState& state, ConvergenceRecord& rec);

/// Uniform family-1 growth by k_u per block, clamped at the spectrum.
OfflineState uniform_step(const MultiscaleSpace& space, const OfflineState& state, int k_u);

/// Runs the configured strategy until convergence, the iteration cap, or the
/// DOF budget; one record per solved space.
std::vector<ConvergenceRecord> run_strategy(const StrategyContext& sc,
                                            const AdaptiveConfig& cfg,
                                            StrategyOutputs* outputs = nullptr);

}  // namespace gmsdg
