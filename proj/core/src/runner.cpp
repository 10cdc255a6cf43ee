#include "gmsdg/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gmsdg/adaptive.hpp"
#include "gmsdg/io.hpp"

namespace gmsdg {

namespace {

PermeabilityField make_kappa(const Grid& grid, const RunConfig& cfg) {
  if (cfg.kappa_source == "constant") return constant_field(grid, cfg.kappa_value);
  if (cfg.kappa_source == "channels")
    return channels_field(grid, cfg.kappa_contrast, cfg.kappa_seed, cfg.kappa_channels);
  if (cfg.kappa_source == "inclusions")
    return inclusions_field(grid, cfg.kappa_contrast, cfg.kappa_seed, cfg.kappa_inclusions);
  PermeabilityField f = load_kappa(cfg.kappa_file);
  if (f.nx != grid.cells_per_axis() || f.ny != grid.cells_per_axis())
    throw std::invalid_argument("runner: kappa file size does not match the grid");
  return f;
}

Eigen::VectorXd make_source(const Grid& grid, const RunConfig& cfg) {
  if (cfg.f_source == "constant") return constant_source(grid, cfg.f_value);
  if (cfg.f_source == "two-region") return two_region_source(grid, cfg.f_value);
  const int n = grid.cells_per_axis();
  return load_cell_field(cfg.f_file, n * n);
}

/// Ordinal of a fine node on the domain boundary loop, counterclockwise from
/// the origin corner; nodes per side = Nc*nf.
int global_boundary_ordinal(const Grid& grid, double x, double y) {
  const Rect& d = grid.domain();
  const int n = grid.cells_per_axis();
  const double tx = (x - d.x0) / grid.hx();
  const double ty = (y - d.y0) / grid.hy();
  const int ix = static_cast<int>(std::lround(tx));
  const int iy = static_cast<int>(std::lround(ty));
  if (iy == 0 && ix < n) return ix;
  if (ix == n && iy < n) return n + iy;
  if (iy == n && ix > 0) return 3 * n - ix;
  if (ix == 0 && iy > 0) return 4 * n - iy;
  throw std::invalid_argument("runner: point is not a boundary fine node");
}

std::function<double(double, double)> make_g(const Grid& grid, const RunConfig& cfg) {
  if (cfg.g_kind == "zero") return nullptr;
  if (cfg.g_kind == "bilinear") {
    const double s = cfg.g_scale;
    return [s](double x, double y) { return s * x * y; };
  }
  auto values = std::make_shared<std::vector<double>>(load_boundary_data(cfg.g_file));
  const int expected = 4 * grid.cells_per_axis();
  if (static_cast<int>(values->size()) != expected)
    throw std::invalid_argument("runner: GDATA length must be " + std::to_string(expected));
  const Grid* g = &grid;
  return [values, g](double x, double y) {
    return (*values)[static_cast<size_t>(global_boundary_ordinal(*g, x, y))];
  };
}

std::string iter_indicator_path(const std::string& dir, int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "indicators_iter%03d.csv", iteration);
  return dir + "/" + buf;
}

}  // namespace

std::string resolve_output_dir(const RunConfig& cfg) {
  std::string dir = cfg.output_dir;
  if (const char* env = std::getenv("GMSDG_OUT")) dir = env;
  std::filesystem::create_directories(dir);
  return dir;
}

Solution solve_snapshot_reference(const DgContext& ctx, const Problem& p,
                                  const MultiscaleSpace& space) {
  Basis basis;
  basis.init(ctx.grid().num_blocks());
  for (int i = 0; i < ctx.grid().num_blocks(); ++i)
    for (int k = 0; k < space.snap1[i].count(); ++k)
      basis.add(i, space.snap1[i].column(ctx, k));
  Solution sol = solve_coarse(ctx, p, basis);
  sol.space = Solution::Space::Snapshot;
  return sol;
}

std::unique_ptr<Workspace> setup_workspace(const RunConfig& cfg) {
  auto ws = std::make_unique<Workspace>();
  ws->cfg = cfg;
  ws->grid = std::make_unique<Grid>(build_grid(cfg.Nc, cfg.nf, cfg.domain));
  ws->kappa = make_kappa(*ws->grid, cfg);
  for (Eigen::Index i = 0; i < ws->kappa.values.size(); ++i)
    if (!(ws->kappa.values[i] >= 1.0))
      throw std::invalid_argument("runner: kappa must be >= 1 everywhere");

  ws->problem.f_cells = make_source(*ws->grid, cfg);
  ws->problem.g = make_g(*ws->grid, cfg);

  ws->ctx = std::make_unique<DgContext>(*ws->grid, ws->kappa,
                                        cfg.gamma_auto ? 1.0 : cfg.gamma);
  if (cfg.gamma_auto) {
    // The fine reference solve must stay coercive, so auto-gamma always uses
    // the plain (full trace space) spectra even when the run itself builds
    // oversampled snapshots.
    double lam_max = 0.0;
    for (int i = 0; i < ws->grid->num_blocks(); ++i)
      lam_max = std::max(lam_max,
                         solve_spectral1(*ws->ctx, build_snapshot1(*ws->ctx, i)).largest());
    const double g = cfg.gamma_alpha * ws->ctx->c_kappa() * ws->grid->h() * lam_max;
    if (!(g > 0.0)) throw std::runtime_error("runner: auto gamma came out nonpositive");
    ws->ctx->set_gamma(g);
  }
  ws->space = MultiscaleSpace::build(*ws->ctx, cfg.oversample, cfg.halo, cfg.n_pod,
                                     cfg.m2_max);

  ws->fine = solve_fine(*ws->ctx, ws->problem);
  if (cfg.snapshot_reference)
    ws->snapshot_reference = std::make_unique<Solution>(
        solve_snapshot_reference(*ws->ctx, ws->problem, ws->space));
  return ws;
}

int run_experiment(const RunConfig& cfg) {
  const std::string dir = resolve_output_dir(cfg);
  auto ws = setup_workspace(cfg);

  StrategyContext sc;
  sc.ctx = ws->ctx.get();
  sc.problem = &ws->problem;
  sc.space = &ws->space;
  sc.fine = &ws->fine;
  sc.snapshot_reference = ws->snapshot_reference.get();
  sc.on_indicators = [&dir](int iteration, const IndicatorSet& set) {
    write_indicators_csv(set, iteration, iter_indicator_path(dir, iteration));
  };

  StrategyOutputs outputs;
  const std::vector<ConvergenceRecord> records = run_strategy(sc, cfg.adaptive, &outputs);

  const std::string strat = strategy_name(cfg.adaptive.strategy);
  write_history_csv(records, strat, dir + "/history.csv");
  write_timings_csv(records, strat, dir + "/timings.csv");
  save_solution_field(*ws->ctx, outputs.last_solution, dir + "/solution_final.bin");
  save_coarse_coefficients(outputs.last_solution, outputs.last_basis,
                           dir + "/solution_coefficients.csv");
  const std::string summary =
      format_summary(records, strat, ws->snapshot_reference != nullptr);
  {
    std::ofstream out(dir + "/summary.txt");
    out << summary;
  }
  std::cout << summary;
  return 0;
}

int compare_experiments(const std::vector<RunConfig>& cfgs) {
  if (cfgs.size() < 2) {
    std::cerr << "compare: need at least two configs\n";
    return 2;
  }
  for (size_t i = 1; i < cfgs.size(); ++i)
    if (!cfgs[0].same_problem(cfgs[i])) {
      std::cerr << "compare: config " << i << " describes a different problem\n";
      return 2;
    }

  const std::string dir = resolve_output_dir(cfgs[0]);
  auto ws = setup_workspace(cfgs[0]);

  std::vector<std::pair<std::string, std::vector<ConvergenceRecord>>> runs;
  for (const auto& cfg : cfgs) {
    StrategyContext sc;
    sc.ctx = ws->ctx.get();
    sc.problem = &ws->problem;
    sc.space = &ws->space;
    sc.fine = &ws->fine;
    sc.snapshot_reference = ws->snapshot_reference.get();
    runs.emplace_back(cfg.label, run_strategy(sc, cfg.adaptive));
  }
  write_comparison_csv(runs, dir + "/comparison.csv");
  std::cout << "wrote " << dir << "/comparison.csv\n";
  return 0;
}

int diag_eigs(const RunConfig& cfg) {
  const std::string dir = resolve_output_dir(cfg);
  auto grid = build_grid(cfg.Nc, cfg.nf, cfg.domain);
  const PermeabilityField kappa = make_kappa(grid, cfg);
  DgContext ctx(grid, kappa, cfg.gamma_auto ? 1.0 : cfg.gamma);

  std::ostringstream csv;
  csv << "block,lambda_plain,lambda_oversampled,ratio\n";
  std::cout << "block  Lambda_snap(plain)  Lambda_snap(oversampled)  ratio\n";
  double max_plain = 0.0, max_over = 0.0;
  for (int i = 0; i < grid.num_blocks(); ++i) {
    const EigenData plain = solve_spectral1(ctx, build_snapshot1(ctx, i));
    const EigenData over =
        solve_spectral1(ctx, build_oversampled_snapshots(ctx, i, cfg.halo, cfg.n_pod));
    const double ratio = over.largest() > 0.0 ? plain.largest() / over.largest() : 0.0;
    max_plain = std::max(max_plain, plain.largest());
    max_over = std::max(max_over, over.largest());
    char line[160];
    std::snprintf(line, sizeof line, "%-6d %-19.6e %-25.6e %.3e\n", i, plain.largest(),
                  over.largest(), ratio);
    std::cout << line;
    csv << i << "," << format_full(plain.largest()) << "," << format_full(over.largest())
        << "," << format_full(ratio) << "\n";
  }
  char line[160];
  std::snprintf(line, sizeof line, "max    %-19.6e %-25.6e %.3e\n", max_plain, max_over,
                max_over > 0.0 ? max_plain / max_over : 0.0);
  std::cout << line;
  std::ofstream out(dir + "/diag_eigs.csv");
  out << csv.str();
  return 0;
}

int generate_kappa(const RunConfig& cfg, const std::string& out_path) {
  auto grid = build_grid(cfg.Nc, cfg.nf, cfg.domain);
  save_kappa(make_kappa(grid, cfg), out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace gmsdg
