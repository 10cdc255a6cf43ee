#pragma once

#include <cstdint>
#include <string>

#include "gmsdg/adaptive.hpp"
#include "gmsdg/grid.hpp"

namespace gmsdg {

/// One experiment: grid, coefficient and data sources, penalty, snapshot
/// options and the enrichment strategy. Parsed from flat key=value lines
/// ('#' starts a comment), e.g. grid.Nc=16.
struct RunConfig {
  int Nc = 16;
  int nf = 32;
  Rect domain;

  std::string kappa_source = "constant";  // constant | channels | inclusions | file
  double kappa_value = 1.0;
  double kappa_contrast = 1e4;
  std::uint64_t kappa_seed = 1;
  int kappa_channels = -1;    // -1: generator default
  int kappa_inclusions = -1;
  std::string kappa_file;

  std::string f_source = "constant";  // constant | two-region | file
  double f_value = 1.0;
  std::string f_file;

  std::string g_kind = "bilinear";  // zero | bilinear | file
  double g_scale = 1.0;
  std::string g_file;

  bool gamma_auto = false;
  double gamma = 16.0;
  double gamma_alpha = 2.0;

  bool oversample = false;
  int halo = 1;
  int n_pod = 40;
  int m2_max = 64;

  AdaptiveConfig adaptive;
  bool snapshot_reference = false;

  std::string output_dir = "out";
  std::string label;

  /// True when two configs describe the same discrete problem (grid,
  /// coefficient, data, penalty and snapshot construction).
  bool same_problem(const RunConfig& other) const;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");
RunConfig parse_config_file(const std::string& path);

std::string strategy_name(Strategy s);

}  // namespace gmsdg
