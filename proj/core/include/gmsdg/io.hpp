#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "gmsdg/adaptive.hpp"
#include "gmsdg/field.hpp"
#include "gmsdg/snapshots.hpp"
#include "gmsdg/solve.hpp"
#include "gmsdg/spectral.hpp"

namespace gmsdg {

/// Formats a double losslessly (17 significant digits).
std::string format_full(double v);

/// Text format: "KAPPA nx ny" then nx*ny row-major cell values. The binary
/// variant (8-byte magic, two 64-bit counts, little-endian doubles) is chosen
/// by a ".bin" suffix on save and auto-detected on load.
void save_kappa(const PermeabilityField& f, const std::string& path);
PermeabilityField load_kappa(const std::string& path);

/// Cell-wise scalar fields (sources) share the kappa text layout.
Eigen::VectorXd load_cell_field(const std::string& path, int expected_n);

/// Boundary data file: "GDATA m" then m values along the domain boundary
/// loop, counterclockwise from the origin corner.
std::vector<double> load_boundary_data(const std::string& path);

/// Snapshot container: magic, block, kind, rows, cols, then the materialized
/// columns (column-major 64-bit little-endian floats).
void save_snapshots(const DgContext& ctx, const SnapshotSpace& s, const std::string& path);
struct LoadedSnapshots {
  int block;
  SnapshotKind kind;
  Eigen::MatrixXd columns;
};
LoadedSnapshots load_snapshots(const std::string& path);

/// Eigen-data container: same layout with a family tag and the eigenvalues
/// ahead of the vectors.
void save_eigendata(const EigenData& e, const std::string& path);
EigenData load_eigendata(const std::string& path);

/// history.csv rows. Wall-clock per iteration goes to a separate timings
/// file so that history files are reproducible byte-for-byte.
void write_history_csv(const std::vector<ConvergenceRecord>& records,
                       const std::string& strategy, const std::string& path);
void write_timings_csv(const std::vector<ConvergenceRecord>& records,
                       const std::string& strategy, const std::string& path);

void write_indicators_csv(const IndicatorSet& set, int iteration, const std::string& path);

/// Long-format comparison rows: strategy,dof,ea,e2.
void write_comparison_csv(
    const std::vector<std::pair<std::string, std::vector<ConvergenceRecord>>>& runs,
    const std::string& path);

/// Solution export: flat binary field (row-major fine nodal values per block)
/// and the coarse coefficients as CSV.
void save_solution_field(const DgContext& ctx, const Solution& sol, const std::string& path);
void save_coarse_coefficients(const Solution& sol, const OfflineBasis& basis,
                              const std::string& path);

/// Plain-text convergence table mirroring the history rows.
std::string format_summary(const std::vector<ConvergenceRecord>& records,
                           const std::string& strategy, bool with_snapshot_errors);

}  // namespace gmsdg
