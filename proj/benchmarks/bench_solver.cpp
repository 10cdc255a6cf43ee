#include <benchmark/benchmark.h>

#include "gmsdg/adaptive.hpp"
#include "gmsdg/dg_form.hpp"
#include "gmsdg/field.hpp"
#include "gmsdg/solve.hpp"
#include "gmsdg/spectral.hpp"

namespace {

using namespace gmsdg;

void bm_block_operators(benchmark::State& state) {
  const int nf = static_cast<int>(state.range(0));
  Grid grid = build_grid(2, nf);
  PermeabilityField kappa = channels_field(grid, 1e4, 7);
  BlockGeometry geom = build_block_geometry(grid);
  for (auto _ : state) {
    BlockOperators ops(grid, kappa, 0, geom);
    benchmark::DoNotOptimize(ops.harmonic_stiffness().norm());
  }
}
BENCHMARK(bm_block_operators)->Arg(8)->Arg(16)->Arg(32);

void bm_spectral1(benchmark::State& state) {
  const int nf = static_cast<int>(state.range(0));
  Grid grid = build_grid(2, nf);
  PermeabilityField kappa = channels_field(grid, 1e4, 7);
  DgContext ctx(grid, kappa, 16.0);
  SnapshotSpace snap = build_snapshot1(ctx, 0);
  for (auto _ : state) {
    EigenData e = solve_spectral1(ctx, snap);
    benchmark::DoNotOptimize(e.largest());
  }
}
BENCHMARK(bm_spectral1)->Arg(8)->Arg(16)->Arg(32);

void bm_fine_solve(benchmark::State& state) {
  const int nc = static_cast<int>(state.range(0));
  Grid grid = build_grid(nc, 8);
  PermeabilityField kappa = channels_field(grid, 1e4, 7);
  DgContext ctx(grid, kappa, 16.0);
  Problem p;
  p.f_cells = constant_source(grid, 1.0);
  for (auto _ : state) {
    Solution u = solve_fine(ctx, p);
    benchmark::DoNotOptimize(u.fine.norm());
  }
}
BENCHMARK(bm_fine_solve)->Arg(2)->Arg(4)->Arg(8);

void bm_coarse_assembly(benchmark::State& state) {
  const int nc = static_cast<int>(state.range(0));
  Grid grid = build_grid(nc, 8);
  PermeabilityField kappa = channels_field(grid, 1e4, 7);
  DgContext ctx(grid, kappa, 16.0);
  MultiscaleSpace space = MultiscaleSpace::build(ctx);
  OfflineState st = OfflineState::initial(grid.num_blocks(), 4, 0);
  Problem p;
  p.f_cells = constant_source(grid, 1.0);
  for (auto _ : state) {
    OfflineBasis ob = build_offline_space(ctx, space, st);
    DGSystem sys = ctx.assemble(ob.basis, p);
    benchmark::DoNotOptimize(sys.matrix.norm());
  }
}
BENCHMARK(bm_coarse_assembly)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
