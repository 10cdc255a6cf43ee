#include "gmsdg/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gmsdg {

namespace {

constexpr char kKappaMagic[8] = {'G', 'M', 'K', 'A', 'P', 'P', 'A', '1'};
constexpr char kSnapMagic[8] = {'G', 'M', 'S', 'N', 'A', 'P', '0', '1'};
constexpr char kEigMagic[8] = {'G', 'M', 'E', 'I', 'G', 'S', '0', '1'};
constexpr char kSolMagic[8] = {'G', 'M', 'S', 'O', 'L', '0', '0', '1'};

void write_i64(std::ostream& out, std::int64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::int64_t read_i64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<std::int64_t>(v);
}

void write_doubles(std::ostream& out, const double* p, std::int64_t n) {
  // Little-endian hosts write directly; this codebase targets x86-64.
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
}

void read_doubles(std::istream& in, double* p, std::int64_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * 8));
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("io: cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("io: cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void save_kappa(const PermeabilityField& f, const std::string& path) {
  if (has_suffix(path, ".bin")) {
    auto out = open_out(path, true);
    out.write(kKappaMagic, 8);
    write_i64(out, f.nx);
    write_i64(out, f.ny);
    write_doubles(out, f.values.data(), f.values.size());
    return;
  }
  auto out = open_out(path, false);
  out << "KAPPA " << f.nx << " " << f.ny << "\n";
  for (int cy = 0; cy < f.ny; ++cy) {
    for (int cx = 0; cx < f.nx; ++cx) {
      if (cx) out << " ";
      out << format_full(f.at(cx, cy));
    }
    out << "\n";
  }
}

PermeabilityField load_kappa(const std::string& path) {
  PermeabilityField f;
  {
    auto in = open_in(path, true);
    char magic[8];
    in.read(magic, 8);
    if (in && std::memcmp(magic, kKappaMagic, 8) == 0) {
      f.nx = static_cast<int>(read_i64(in));
      f.ny = static_cast<int>(read_i64(in));
      if (f.nx <= 0 || f.ny <= 0) throw std::runtime_error("io: bad kappa header in " + path);
      f.values.resize(static_cast<Eigen::Index>(f.nx) * f.ny);
      read_doubles(in, f.values.data(), f.values.size());
      if (!in) throw std::runtime_error("io: truncated kappa file " + path);
      for (Eigen::Index i = 0; i < f.values.size(); ++i)
        if (!(f.values[i] >= 1.0))
          throw std::runtime_error("io: kappa value < 1 at cell " + std::to_string(i) +
                                   " in " + path);
      return f;
    }
  }
  auto in = open_in(path, false);
  std::string token;
  in >> token;
  if (token != "KAPPA") throw std::runtime_error("io: expected KAPPA header in " + path);
  in >> f.nx >> f.ny;
  if (!in || f.nx <= 0 || f.ny <= 0)
    throw std::runtime_error("io: bad kappa header in " + path);
  f.values.resize(static_cast<Eigen::Index>(f.nx) * f.ny);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    if (!(in >> f.values[i]))
      throw std::runtime_error("io: truncated kappa file " + path);
    if (!(f.values[i] >= 1.0))
      throw std::runtime_error("io: kappa value < 1 at cell " + std::to_string(i) + " in " +
                               path);
  }
  return f;
}

Eigen::VectorXd load_cell_field(const std::string& path, int expected_n) {
  auto in = open_in(path, false);
  std::string token;
  in >> token;
  if (token != "KAPPA" && token != "FIELD")
    throw std::runtime_error("io: expected KAPPA or FIELD header in " + path);
  int nx = 0, ny = 0;
  in >> nx >> ny;
  if (!in || nx <= 0 || ny <= 0) throw std::runtime_error("io: bad field header in " + path);
  if (static_cast<long>(nx) * ny != expected_n)
    throw std::runtime_error("io: field size mismatch in " + path);
  Eigen::VectorXd v(expected_n);
  for (int i = 0; i < expected_n; ++i)
    if (!(in >> v[i])) throw std::runtime_error("io: truncated field file " + path);
  return v;
}

std::vector<double> load_boundary_data(const std::string& path) {
  auto in = open_in(path, false);
  std::string token;
  in >> token;
  if (token != "GDATA") throw std::runtime_error("io: expected GDATA header in " + path);
  int m = 0;
  in >> m;
  if (!in || m <= 0) throw std::runtime_error("io: bad GDATA header in " + path);
  std::vector<double> v(m);
  for (int i = 0; i < m; ++i)
    if (!(in >> v[i])) throw std::runtime_error("io: truncated GDATA file " + path);
  return v;
}

void save_snapshots(const DgContext& ctx, const SnapshotSpace& s, const std::string& path) {
  const Eigen::MatrixXd cols = s.materialize(ctx);
  auto out = open_out(path, true);
  out.write(kSnapMagic, 8);
  write_i64(out, s.block);
  write_i64(out, static_cast<std::int64_t>(s.kind));
  write_i64(out, cols.rows());
  write_i64(out, cols.cols());
  write_doubles(out, cols.data(), cols.size());
}

LoadedSnapshots load_snapshots(const std::string& path) {
  auto in = open_in(path, true);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kSnapMagic, 8) != 0)
    throw std::runtime_error("io: not a snapshot file: " + path);
  LoadedSnapshots s;
  s.block = static_cast<int>(read_i64(in));
  s.kind = static_cast<SnapshotKind>(read_i64(in));
  const std::int64_t rows = read_i64(in);
  const std::int64_t cols = read_i64(in);
  if (!in || rows <= 0 || cols <= 0)
    throw std::runtime_error("io: bad snapshot header in " + path);
  s.columns.resize(rows, cols);
  read_doubles(in, s.columns.data(), rows * cols);
  if (!in) throw std::runtime_error("io: truncated snapshot file " + path);
  return s;
}

void save_eigendata(const EigenData& e, const std::string& path) {
  auto out = open_out(path, true);
  out.write(kEigMagic, 8);
  write_i64(out, e.block);
  write_i64(out, e.family);
  write_i64(out, e.eigenvectors.rows());
  write_i64(out, e.eigenvectors.cols());
  write_doubles(out, e.eigenvalues.data(), e.eigenvalues.size());
  write_doubles(out, e.eigenvectors.data(), e.eigenvectors.size());
}

EigenData load_eigendata(const std::string& path) {
  auto in = open_in(path, true);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kEigMagic, 8) != 0)
    throw std::runtime_error("io: not an eigen-data file: " + path);
  EigenData e;
  e.block = static_cast<int>(read_i64(in));
  e.family = static_cast<int>(read_i64(in));
  const std::int64_t rows = read_i64(in);
  const std::int64_t cols = read_i64(in);
  if (!in || rows <= 0 || cols < 0)
    throw std::runtime_error("io: bad eigen-data header in " + path);
  e.eigenvalues.resize(cols);
  e.eigenvectors.resize(rows, cols);
  read_doubles(in, e.eigenvalues.data(), cols);
  read_doubles(in, e.eigenvectors.data(), rows * cols);
  if (!in) throw std::runtime_error("io: truncated eigen-data file " + path);
  return e;
}

void write_history_csv(const std::vector<ConvergenceRecord>& records,
                       const std::string& strategy, const std::string& path) {
  auto out = open_out(path, false);
  out << "m,strategy,dof,e2,ea,e2_snap,ea_snap,sum_eta2,k_marked,n_added,n_removed\n";
  for (const auto& r : records) {
    out << r.iteration << "," << strategy << "," << r.dof << "," << format_full(r.e2) << ","
        << format_full(r.ea) << "," << format_full(r.e2_snap) << ","
        << format_full(r.ea_snap) << "," << format_full(r.sum_eta2) << "," << r.k_marked
        << "," << r.n_added << "," << r.n_removed << "\n";
  }
}

void write_timings_csv(const std::vector<ConvergenceRecord>& records,
                       const std::string& strategy, const std::string& path) {
  auto out = open_out(path, false);
  out << "m,strategy,dof,seconds\n";
  for (const auto& r : records)
    out << r.iteration << "," << strategy << "," << r.dof << "," << format_full(r.seconds)
        << "\n";
}

void write_indicators_csv(const IndicatorSet& set, int iteration, const std::string& path) {
  auto out = open_out(path, false);
  out << "iteration,block,family,residual_norm,lambda_next,eta_sq\n";
  for (const auto& e : set.entries)
    out << iteration << "," << e.block << "," << e.family << ","
        << format_full(e.residual_norm) << "," << format_full(e.lambda_next) << ","
        << format_full(e.eta_sq) << "\n";
}

void write_comparison_csv(
    const std::vector<std::pair<std::string, std::vector<ConvergenceRecord>>>& runs,
    const std::string& path) {
  auto out = open_out(path, false);
  out << "strategy,dof,ea,e2\n";
  for (const auto& [label, records] : runs)
    for (const auto& r : records)
      out << label << "," << r.dof << "," << format_full(r.ea) << "," << format_full(r.e2)
          << "\n";
}

void save_solution_field(const DgContext& ctx, const Solution& sol, const std::string& path) {
  auto out = open_out(path, true);
  out.write(kSolMagic, 8);
  write_i64(out, ctx.grid().num_blocks());
  write_i64(out, ctx.grid().nodes_per_block());
  // Node ordering inside a block is already row-major.
  write_doubles(out, sol.fine.data(), sol.fine.size());
}

void save_coarse_coefficients(const Solution& sol, const OfflineBasis& basis,
                              const std::string& path) {
  auto out = open_out(path, false);
  out << "block,family,index,coefficient\n";
  for (int c = 0; c < static_cast<int>(basis.tags.size()); ++c)
    out << basis.tags[c].block << "," << basis.tags[c].family << "," << basis.tags[c].index
        << "," << format_full(sol.coefficients[c]) << "\n";
}

std::string format_summary(const std::vector<ConvergenceRecord>& records,
                           const std::string& strategy, bool with_snapshot_errors) {
  std::ostringstream out;
  out << "strategy: " << strategy << "\n";
  out << "DOF        e2           ea";
  if (with_snapshot_errors) out << "           e2_snap      ea_snap";
  out << "\n";
  char buf[160];
  for (const auto& r : records) {
    if (with_snapshot_errors)
      std::snprintf(buf, sizeof buf, "%-10ld %-12.4e %-12.4e %-12.4e %-12.4e\n", r.dof, r.e2,
                    r.ea, r.e2_snap, r.ea_snap);
    else
      std::snprintf(buf, sizeof buf, "%-10ld %-12.4e %-12.4e\n", r.dof, r.e2, r.ea);
    out << buf;
  }
  return out.str();
}

}  // namespace gmsdg
