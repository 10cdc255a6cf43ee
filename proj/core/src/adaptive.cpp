#include "gmsdg/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>

namespace gmsdg {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<int> inactive_indices(const std::vector<int>& active, int spectrum_size) {
  std::vector<int> out;
  size_t a = 0;
  for (int k = 0; k < spectrum_size; ++k) {
    while (a < active.size() && active[a] < k) ++a;
    if (a < active.size() && active[a] == k) continue;
    out.push_back(k);
  }
  return out;
}

struct SolveResult {
  OfflineBasis basis;
  Solution u;
};

SolveResult solve_and_record(const StrategyContext& sc, const OfflineState& state,
                             ConvergenceRecord& rec) {
  SolveResult r;
  r.basis = build_offline_space(*sc.ctx, *sc.space, state);
  r.u = solve_coarse(*sc.ctx, *sc.problem, r.basis.basis);
  rec.dof = state.dof();
  auto [e2, ea] = relative_errors(*sc.ctx, r.u, *sc.fine);
  rec.e2 = e2;
  rec.ea = ea;
  if (sc.snapshot_reference) {
    auto [e2s, eas] = relative_errors(*sc.ctx, r.u, *sc.snapshot_reference);
    rec.e2_snap = e2s;
    rec.ea_snap = eas;
  } else {
    rec.e2_snap = std::numeric_limits<double>::quiet_NaN();
    rec.ea_snap = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace

int dorfler_mark(const std::vector<double>& eta_sq_descending, double theta) {
  double total = 0.0;
  for (double v : eta_sq_descending) total += v;
  if (!(total > 0.0)) return 0;
  double acc = 0.0;
  for (size_t k = 0; k < eta_sq_descending.size(); ++k) {
    acc += eta_sq_descending[k];
    if (acc >= theta * total) return static_cast<int>(k) + 1;
  }
  return static_cast<int>(eta_sq_descending.size());
}

std::vector<int> choose_s(const EigenData& eig, const std::vector<int>& active,
                          double delta0) {
  const std::vector<int> inactive = inactive_indices(active, eig.count());
  if (inactive.empty()) return {};
  const double lam_first = eig.eigenvalues[inactive[0]];
  for (size_t s = 1; s < inactive.size(); ++s)
    if (eig.eigenvalues[inactive[s]] >= lam_first / delta0)
      return {inactive.begin(), inactive.begin() + static_cast<long>(s)};
  return inactive;  // no large-enough eigenvalue left; family exhausted
}

int activate_indices(std::vector<int>& active, const std::vector<int>& indices) {
  int added = 0;
  for (int k : indices) {
    auto it = std::lower_bound(active.begin(), active.end(), k);
    if (it != active.end() && *it == k) continue;
    active.insert(it, k);
    ++added;
  }
  return added;
}

int remove_basis(OfflineState& state, const OfflineBasis& basis,
                 const Eigen::VectorXd& coefficients, double eps) {
  if (!(eps > 0.0)) return 0;
  const int n = static_cast<int>(state.active1.size());
  std::vector<double> total(n, 0.0);
  for (int c = 0; c < static_cast<int>(basis.tags.size()); ++c)
    total[basis.tags[c].block] += coefficients[c] * coefficients[c];

  std::vector<std::vector<int>> drop1(n), drop2(n);
  for (int c = 0; c < static_cast<int>(basis.tags.size()); ++c) {
    const auto& tag = basis.tags[c];
    if (coefficients[c] * coefficients[c] < eps * total[tag.block])
      (tag.family == 1 ? drop1 : drop2)[tag.block].push_back(tag.index);
  }

  int removed = 0;
  for (int i = 0; i < n; ++i) {
    // Keep at least one family-1 function per block (the constant mode lives
    // there).
    if (!state.active1[i].empty() && drop1[i].size() >= state.active1[i].size()) {
      auto lowest = std::min_element(drop1[i].begin(), drop1[i].end());
      drop1[i].erase(lowest);
    }
    for (int k : drop1[i]) {
      auto it = std::lower_bound(state.active1[i].begin(), state.active1[i].end(), k);
      if (it != state.active1[i].end() && *it == k) {
        state.active1[i].erase(it);
        ++removed;
      }
    }
    for (int k : drop2[i]) {
      auto it = std::lower_bound(state.active2[i].begin(), state.active2[i].end(), k);
      if (it != state.active2[i].end() && *it == k) {
        state.active2[i].erase(it);
        ++removed;
      }
    }
  }
  return removed;
}

OfflineState adaptive_step(const StrategyContext& sc, const AdaptiveConfig& cfg,
                           const OfflineState& state, ConvergenceRecord& rec) {
  const DgContext& ctx = *sc.ctx;
  const SolveResult solved = solve_and_record(sc, state, rec);
  const Eigen::VectorXd rhsg = ctx.rhs_fine(*sc.problem);

  // Marking values: either the eta indicators or the localized exact error.
  std::vector<IndicatorEntry> entries;
  if (cfg.strategy == Strategy::ExactIndicator) {
    const FineField diff = sc.fine->fine - solved.u.fine;
    entries.resize(ctx.grid().num_blocks());
    for (int i = 0; i < ctx.grid().num_blocks(); ++i) {
      entries[i].block = i;
      entries[i].family = 1;
      entries[i].eta_sq = std::max(exact_local_indicator_sq(ctx, diff, i), 0.0);
    }
    std::sort(entries.begin(), entries.end(),
              [](const IndicatorEntry& a, const IndicatorEntry& b) {
                if (a.eta_sq != b.eta_sq) return a.eta_sq > b.eta_sq;
                return a.block < b.block;
              });
  } else {
    IndicatorSet iset = eta_and_S(ctx, *sc.space, state, rhsg, solved.u.fine, cfg.families);
    if (sc.on_indicators) sc.on_indicators(rec.iteration, iset);
    entries = std::move(iset.entries);
  }
  std::vector<double> vals;
  vals.reserve(entries.size());
  for (const auto& e : entries) vals.push_back(e.eta_sq);
  rec.sum_eta2 = 0.0;
  for (double v : vals) rec.sum_eta2 += v;

  const int k = dorfler_mark(vals, cfg.theta);
  rec.k_marked = k;
  if (k == 0) {
    rec.converged = true;
    return state;
  }

  OfflineState next = state;
  for (int j = 0; j < k; ++j) {
    const IndicatorEntry& e = entries[j];
    if (e.family == 1) {
      rec.n_added += activate_indices(
          next.active1[e.block], choose_s(sc.space->eig1[e.block], state.active1[e.block],
                                          cfg.delta0));
    } else {
      rec.n_added += activate_indices(
          next.active2[e.block], choose_s(sc.space->family2(ctx, e.block),
                                          state.active2[e.block], cfg.delta0));
    }
  }
  rec.n_removed = remove_basis(next, solved.basis, solved.u.coefficients, cfg.remove_eps);
  if (rec.n_added == 0 && rec.n_removed == 0) rec.converged = true;
  return next;
}

OfflineState pursuit_step(const StrategyContext& sc, const AdaptiveConfig& cfg,
                          const OfflineState& state, ConvergenceRecord& rec) {
  const DgContext& ctx = *sc.ctx;
  const SolveResult solved = solve_and_record(sc, state, rec);
  const Eigen::VectorXd rhsg = ctx.rhs_fine(*sc.problem);

  struct Candidate {
    double zeta;
    int block;
    int family;
    int index;
  };
  std::vector<Candidate> cands;
  for (int i = 0; i < ctx.grid().num_blocks(); ++i) {
    {
      const auto& eig = sc.space->eig1[i];
      const std::vector<int> inact = inactive_indices(state.active1[i], eig.count());
      if (!inact.empty()) {
        const Eigen::VectorXd r =
            residual_components_f1(ctx, rhsg, solved.u.fine, sc.space->snap1[i]);
        const std::vector<double> z = zeta_correlations(ctx, sc.space->snap1[i], eig, r, inact);
        for (size_t c = 0; c < inact.size(); ++c) cands.push_back({z[c], i, 1, inact[c]});
      }
    }
    if (cfg.families == Families::V1V2) {
      const EigenData& eig = sc.space->family2(ctx, i);
      const std::vector<int> inact = inactive_indices(state.active2[i], eig.count());
      if (!inact.empty()) {
        const Eigen::VectorXd r = residual_components_f2(ctx, rhsg, solved.u.fine, i);
        const std::vector<double> z = zeta_correlations(ctx, sc.space->snap1[i], eig, r, inact);
        for (size_t c = 0; c < inact.size(); ++c) cands.push_back({z[c], i, 2, inact[c]});
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.zeta != b.zeta) return a.zeta > b.zeta;
    return std::tie(a.block, a.family, a.index) < std::tie(b.block, b.family, b.index);
  });
  rec.sum_eta2 = 0.0;
  for (const auto& c : cands) rec.sum_eta2 += c.zeta * c.zeta;

  if (cands.empty() || !(cands[0].zeta > 0.0)) {
    rec.converged = true;
    return state;
  }
  const double cutoff = cfg.theta * cands[0].zeta;
  OfflineState next = state;
  for (const auto& c : cands) {
    if (c.zeta < cutoff || !(c.zeta > 0.0)) break;
    auto& active = (c.family == 1) ? next.active1[c.block] : next.active2[c.block];
    rec.n_added += activate_indices(active, {c.index});
  }
  rec.k_marked = rec.n_added;
  rec.n_removed = remove_basis(next, solved.basis, solved.u.coefficients, cfg.remove_eps);
  if (rec.n_added == 0 && rec.n_removed == 0) rec.converged = true;
  return next;
}

OfflineState uniform_step(const MultiscaleSpace& space, const OfflineState& state, int k_u) {
  OfflineState next = state;
  for (size_t i = 0; i < state.active1.size(); ++i) {
    const std::vector<int> inact =
        inactive_indices(state.active1[i], space.eig1[i].count());
    const int take = std::min<int>(k_u, static_cast<int>(inact.size()));
    activate_indices(next.active1[i],
                     {inact.begin(), inact.begin() + take});
  }
  return next;
}

std::vector<ConvergenceRecord> run_strategy(const StrategyContext& sc,
                                            const AdaptiveConfig& cfg,
                                            StrategyOutputs* outputs) {
  const DgContext& ctx = *sc.ctx;
  const int n = ctx.grid().num_blocks();
  OfflineState state = OfflineState::initial(n, cfg.l1_init, cfg.l2_init);
  for (int i = 0; i < n; ++i) {
    while (!state.active1[i].empty() &&
           state.active1[i].back() >= sc.space->eig1[i].count())
      state.active1[i].pop_back();
    if (cfg.l2_init > 0) {
      const int dim = sc.space->family2(ctx, i).count();
      while (!state.active2[i].empty() && state.active2[i].back() >= dim)
        state.active2[i].pop_back();
    }
  }

  std::vector<ConvergenceRecord> records;
  OfflineState solved_state = state;
  for (int m = 0; m < cfg.max_iter; ++m) {
    const double t0 = now_seconds();
    solved_state = state;
    ConvergenceRecord rec;
    rec.iteration = m;
    OfflineState next;
    switch (cfg.strategy) {
      case Strategy::Adaptive:
      case Strategy::ExactIndicator:
        next = adaptive_step(sc, cfg, state, rec);
        break;
      case Strategy::Pursuit:
        next = pursuit_step(sc, cfg, state, rec);
        break;
      case Strategy::Uniform: {
        solve_and_record(sc, state, rec);
        next = uniform_step(*sc.space, state, cfg.uniform_k);
        rec.n_added = static_cast<int>(next.dof() - state.dof());
        if (rec.n_added == 0) rec.converged = true;
        break;
      }
    }
    rec.seconds = now_seconds() - t0;
    records.push_back(rec);
    if (rec.converged) break;
    if (cfg.dof_budget > 0 && next.dof() > cfg.dof_budget) break;
    state = std::move(next);
  }

  if (outputs) {
    // The last space that was actually solved; re-solving it hits the column
    // cache.
    outputs->last_state = solved_state;
    outputs->last_basis = build_offline_space(ctx, *sc.space, solved_state);
    outputs->last_solution = solve_coarse(ctx, *sc.problem, outputs->last_basis.basis);
  }
  return records;
}

}  // namespace gmsdg
