#include "gmsdg/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gmsdg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw std::invalid_argument("config (" + origin + "): " + msg);
}

}  // namespace

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Adaptive: return "adaptive";
    case Strategy::Uniform: return "uniform";
    case Strategy::ExactIndicator: return "exact";
    case Strategy::Pursuit: return "pursuit";
  }
  return "?";
}

bool RunConfig::same_problem(const RunConfig& o) const {
  return Nc == o.Nc && nf == o.nf && domain.x0 == o.domain.x0 && domain.y0 == o.domain.y0 &&
         domain.x1 == o.domain.x1 && domain.y1 == o.domain.y1 &&
         kappa_source == o.kappa_source && kappa_value == o.kappa_value &&
         kappa_contrast == o.kappa_contrast && kappa_seed == o.kappa_seed &&
         kappa_channels == o.kappa_channels && kappa_inclusions == o.kappa_inclusions &&
         kappa_file == o.kappa_file && f_source == o.f_source && f_value == o.f_value &&
         f_file == o.f_file && g_kind == o.g_kind && g_scale == o.g_scale &&
         g_file == o.g_file && gamma_auto == o.gamma_auto && gamma == o.gamma &&
         gamma_alpha == o.gamma_alpha && oversample == o.oversample && halo == o.halo &&
         n_pod == o.n_pod;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(origin, "line " + std::to_string(lineno) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  RunConfig c;
  bool theta_set = false;
  auto get_double = [&](const std::string& key, const std::string& val) {
    try {
      size_t used = 0;
      double d = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      return d;
    } catch (...) {
      fail(origin, key + ": not a number: '" + val + "'");
    }
  };
  auto get_int = [&](const std::string& key, const std::string& val) {
    try {
      size_t used = 0;
      long v = std::stol(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      return static_cast<int>(v);
    } catch (...) {
      fail(origin, key + ": not an integer: '" + val + "'");
    }
  };
  auto get_bool = [&](const std::string& key, const std::string& val) {
    if (val == "1" || val == "true" || val == "on") return true;
    if (val == "0" || val == "false" || val == "off") return false;
    fail(origin, key + ": not a boolean: '" + val + "'");
  };

  for (const auto& [key, val] : kv) {
    if (key == "grid.Nc") c.Nc = get_int(key, val);
    else if (key == "grid.nf") c.nf = get_int(key, val);
    else if (key == "grid.x0") c.domain.x0 = get_double(key, val);
    else if (key == "grid.y0") c.domain.y0 = get_double(key, val);
    else if (key == "grid.x1") c.domain.x1 = get_double(key, val);
    else if (key == "grid.y1") c.domain.y1 = get_double(key, val);
    else if (key == "kappa.source") c.kappa_source = val;
    else if (key == "kappa.value") c.kappa_value = get_double(key, val);
    else if (key == "kappa.contrast") c.kappa_contrast = get_double(key, val);
    else if (key == "kappa.seed") c.kappa_seed = static_cast<std::uint64_t>(get_double(key, val));
    else if (key == "kappa.channels") c.kappa_channels = get_int(key, val);
    else if (key == "kappa.inclusions") c.kappa_inclusions = get_int(key, val);
    else if (key == "kappa.file") c.kappa_file = val;
    else if (key == "f.source") c.f_source = val;
    else if (key == "f.value") c.f_value = get_double(key, val);
    else if (key == "f.file") c.f_file = val;
    else if (key == "g.kind") c.g_kind = val;
    else if (key == "g.scale") c.g_scale = get_double(key, val);
    else if (key == "g.file") c.g_file = val;
    else if (key == "dg.gamma") {
      if (val == "auto") c.gamma_auto = true;
      else c.gamma = get_double(key, val);
    } else if (key == "dg.alpha") c.gamma_alpha = get_double(key, val);
    else if (key == "snapshots.oversample") c.oversample = get_bool(key, val);
    else if (key == "snapshots.halo") c.halo = get_int(key, val);
    else if (key == "snapshots.npod") c.n_pod = get_int(key, val);
    else if (key == "spectral.m2max") c.m2_max = get_int(key, val);
    else if (key == "strategy") {
      if (val == "adaptive") c.adaptive.strategy = Strategy::Adaptive;
      else if (val == "uniform") c.adaptive.strategy = Strategy::Uniform;
      else if (val == "exact") c.adaptive.strategy = Strategy::ExactIndicator;
      else if (val == "pursuit") c.adaptive.strategy = Strategy::Pursuit;
      else fail(origin, "unknown strategy '" + val + "'");
    } else if (key == "families") {
      if (val == "v1") c.adaptive.families = Families::V1;
      else if (val == "v1v2") c.adaptive.families = Families::V1V2;
      else fail(origin, "unknown families '" + val + "'");
    } else if (key == "adaptive.theta") {
      c.adaptive.theta = get_double(key, val);
      theta_set = true;
    } else if (key == "adaptive.delta0") c.adaptive.delta0 = get_double(key, val);
    else if (key == "adaptive.remove_eps") c.adaptive.remove_eps = get_double(key, val);
    else if (key == "adaptive.max_iter") c.adaptive.max_iter = get_int(key, val);
    else if (key == "adaptive.dof_budget") c.adaptive.dof_budget = get_int(key, val);
    else if (key == "adaptive.l1_init") c.adaptive.l1_init = get_int(key, val);
    else if (key == "adaptive.l2_init") c.adaptive.l2_init = get_int(key, val);
    else if (key == "adaptive.uniform_k") c.adaptive.uniform_k = get_int(key, val);
    else if (key == "reference.snapshot") c.snapshot_reference = get_bool(key, val);
    else if (key == "output.dir") c.output_dir = val;
    else if (key == "label") c.label = val;
    else fail(origin, "unknown key '" + key + "'");
  }

  // Pursuit marks against the top correlation; its customary threshold is
  // tighter than the Dorfler default.
  if (!theta_set && c.adaptive.strategy == Strategy::Pursuit) c.adaptive.theta = 0.8;

  if (c.Nc < 1) fail(origin, "grid.Nc must be >= 1");
  if (c.nf < 2) fail(origin, "grid.nf must be >= 2");
  if (!(c.domain.width() > 0.0) || !(c.domain.height() > 0.0)) fail(origin, "degenerate domain");
  if (!(c.adaptive.theta > 0.0 && c.adaptive.theta < 1.0))
    fail(origin, "adaptive.theta must be in (0,1)");
  if (!(c.adaptive.delta0 > 0.0 && c.adaptive.delta0 < 1.0))
    fail(origin, "adaptive.delta0 must be in (0,1)");
  if (c.adaptive.remove_eps < 0.0) fail(origin, "adaptive.remove_eps must be >= 0");
  if (c.kappa_source != "constant" && c.kappa_source != "channels" &&
      c.kappa_source != "inclusions" && c.kappa_source != "file")
    fail(origin, "unknown kappa.source '" + c.kappa_source + "'");
  if (c.kappa_source == "file" && c.kappa_file.empty()) fail(origin, "kappa.file missing");
  if (c.kappa_source != "file" && c.kappa_source != "constant" && c.kappa_contrast < 1.0)
    fail(origin, "kappa.contrast must be >= 1");
  if (c.kappa_source == "constant" && c.kappa_value < 1.0)
    fail(origin, "kappa.value must be >= 1");
  if (c.f_source != "constant" && c.f_source != "two-region" && c.f_source != "file")
    fail(origin, "unknown f.source '" + c.f_source + "'");
  if (c.f_source == "file" && c.f_file.empty()) fail(origin, "f.file missing");
  if (c.g_kind != "zero" && c.g_kind != "bilinear" && c.g_kind != "file")
    fail(origin, "unknown g.kind '" + c.g_kind + "'");
  if (c.g_kind == "file" && c.g_file.empty()) fail(origin, "g.file missing");
  if (!c.gamma_auto && !(c.gamma > 0.0)) fail(origin, "dg.gamma must be positive");
  if (c.halo < 1) fail(origin, "snapshots.halo must be >= 1");
  if (c.n_pod < 1) fail(origin, "snapshots.npod must be >= 1");
  if (c.label.empty()) c.label = strategy_name(c.adaptive.strategy);
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace gmsdg
