#pragma once

// Run configuration read from a YAML document. Every key is checked; unknown
// keys and malformed values are reported with their line number.

#include <yaml-cpp/yaml.h>

#include <array>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pgdfit/electrothermal.hpp"
#include "pgdfit/errors.hpp"
#include "pgdfit/mesh.hpp"
#include "pgdfit/pgd_engine.hpp"
#include "pgdfit/problems.hpp"
#include "pgdfit/separated.hpp"

namespace pgdfit {

class ConfigError : public Error {
public:
  ConfigError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  /// 1-based line of the offending node, 0 when unknown
  int line() const noexcept { return line_; }

private:
  int line_;
};

/// c * mu_p, or a plain constant when axis is empty.
struct MaterialValue {
  double scale = 1.0;
  std::optional<std::size_t> axis;
};

struct RegionSpec {
  std::vector<std::array<double, 2>> box;
  MaterialValue value;
};

struct DirichletSpec {
  std::vector<std::array<double, 2>> box;
  double value = 0.0;
};

struct FieldSpec {
  MaterialValue background;
  /// later regions override earlier ones cell by cell
  std::vector<RegionSpec> regions;
  std::vector<DirichletSpec> dirichlet;
};

struct AxisSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 2;
};

enum class ProblemKind { model1d, block3d, custom };

struct RunConfig {
  ProblemKind problem = ProblemKind::model1d;
  ModelRodOptions rod;
  BridgeBlockOptions block;
  /// custom problems only
  std::vector<std::vector<double>> grid_axes;
  std::vector<AxisSpec> axes;
  FieldSpec electric, thermal;

  PgdConfig pgd;
  FieldOptions options;
  double joule_cutoff = 0.0;
  std::string output = "pgdfit_out";
  bool oracle = true;
  std::size_t sweep_budget = 10000;
};

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

inline void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
  if (!map.IsMap()) throw ConfigError(where + " must be a mapping", line_of(map));
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where, line_of(kv.first));
  }
}

/// Line of `key` itself within a mapping (the value may start on a later line).
inline int key_line(const YAML::Node& map, const std::string& key) {
  for (const auto& kv : map)
    if (kv.first.as<std::string>() == key) return line_of(kv.first);
  return line_of(map);
}

template <class T>
T scalar(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) throw ConfigError(what + " must be a scalar", line_of(n));
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value '" + n.Scalar() + "' for " + what, line_of(n));
  }
}

inline std::size_t count(const YAML::Node& n, const std::string& what) {
  const auto v = scalar<long long>(n, what);
  if (v < 0) throw ConfigError(what + " must be non-negative", line_of(n));
  return static_cast<std::size_t>(v);
}

inline std::array<double, 2> interval(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(what + " must be [lo, hi]", line_of(n));
  const std::array<double, 2> r{scalar<double>(n[0], what), scalar<double>(n[1], what)};
  if (r[0] > r[1]) throw ConfigError(what + " has lo > hi", line_of(n));
  return r;
}

inline std::vector<std::array<double, 2>> box(const YAML::Node& n, std::size_t dim, const std::string& what) {
  if (!n.IsSequence() || n.size() != dim)
    throw ConfigError(what + " must list " + std::to_string(dim) + " interval(s)", line_of(n));
  std::vector<std::array<double, 2>> b;
  for (const auto& i : n) b.push_back(interval(i, what));
  return b;
}

inline MaterialValue material_value(const YAML::Node& n, const std::vector<AxisSpec>& axes) {
  if (!n.IsScalar()) throw ConfigError("material value must be a number or 'c*name'", line_of(n));
  const std::string s = n.Scalar();
  MaterialValue v;
  try {
    std::size_t used = 0;
    v.scale = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  std::string symbol = s;
  v.scale = 1.0;
  if (const auto star = s.find('*'); star != std::string::npos) {
    try {
      std::size_t used = 0;
      const std::string c = s.substr(0, star);
      v.scale = std::stod(c, &used);
      if (c.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(c);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse material value '" + s + "'", line_of(n));
    }
    symbol = s.substr(star + 1);
  }
  symbol.erase(0, symbol.find_first_not_of(' '));
  symbol.erase(symbol.find_last_not_of(' ') + 1);
  for (std::size_t p = 0; p < axes.size(); ++p)
    if (axes[p].name == symbol) {
      v.axis = p;
      return v;
    }
  throw ConfigError("unknown parameter symbol '" + symbol + "'", line_of(n));
}

inline FieldSpec field_spec(const YAML::Node& n, std::size_t dim, const std::vector<AxisSpec>& axes,
                            const std::string& where) {
  check_keys(n, {"background", "regions", "dirichlet"}, where);
  FieldSpec f;
  if (!n["background"]) throw ConfigError(where + ".background is required", line_of(n));
  f.background = material_value(n["background"], axes);
  if (const auto r = n["regions"]) {
    if (!r.IsSequence()) throw ConfigError(where + ".regions must be a list", line_of(r));
    for (const auto& item : r) {
      check_keys(item, {"box", "value"}, where + ".regions entry");
      if (!item["box"] || !item["value"]) throw ConfigError("region needs box and value", line_of(item));
      f.regions.push_back({box(item["box"], dim, "region box"), material_value(item["value"], axes)});
    }
  }
  const auto d = n["dirichlet"];
  if (!d || !d.IsSequence() || d.size() == 0)
    throw ConfigError(where + ".dirichlet must be a non-empty list", line_of(d ? d : n));
  for (const auto& item : d) {
    check_keys(item, {"box", "value"}, where + ".dirichlet entry");
    if (!item["box"] || !item["value"]) throw ConfigError("dirichlet entry needs box and value", line_of(item));
    f.dirichlet.push_back({box(item["box"], dim, "dirichlet box"), scalar<double>(item["value"], "dirichlet value")});
  }
  return f;
}

}  // namespace detail

/// Parses a configuration document. Geometry and axes are validated here so
/// errors surface before any solve.
inline RunConfig parse_config(const std::string& text) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("empty configuration", 0);
  check_keys(root, {"problem", "model1d", "block3d", "grid", "parameters", "electric", "thermal", "solver",
                    "output", "oracle"},
             "document");

  RunConfig c;
  if (!root["problem"]) throw ConfigError("'problem' is required", line_of(root));
  const auto kind = scalar<std::string>(root["problem"], "problem");
  const std::map<std::string, ProblemKind> kinds{
      {"model1d", ProblemKind::model1d}, {"block3d", ProblemKind::block3d}, {"custom", ProblemKind::custom}};
  if (!kinds.count(kind))
    throw ConfigError("problem must be model1d, block3d or custom", line_of(root["problem"]));
  c.problem = kinds.at(kind);

  const auto only_for = [&](const char* key, ProblemKind k) {
    if (root[key] && c.problem != k)
      throw ConfigError(std::string("section '") + key + "' does not apply to problem " + kind,
                        key_line(root, key));
  };
  only_for("model1d", ProblemKind::model1d);
  only_for("block3d", ProblemKind::block3d);
  for (const char* key : {"grid", "parameters", "electric", "thermal"}) only_for(key, ProblemKind::custom);

  if (const auto m = root["model1d"]) {
    check_keys(m, {"cells", "mu_points", "mu_range", "half_length", "potential", "temperature"}, "model1d");
    if (m["cells"]) c.rod.cells = count(m["cells"], "model1d.cells");
    if (m["mu_points"]) c.rod.mu_points = count(m["mu_points"], "model1d.mu_points");
    if (m["mu_range"]) {
      const auto r = interval(m["mu_range"], "model1d.mu_range");
      c.rod.mu_lo = r[0];
      c.rod.mu_hi = r[1];
    }
    if (m["half_length"]) c.rod.half_length = scalar<double>(m["half_length"], "model1d.half_length");
    if (m["potential"]) c.rod.potential = scalar<double>(m["potential"], "model1d.potential");
    if (m["temperature"]) c.rod.temperature = scalar<double>(m["temperature"], "model1d.temperature");
  }
  if (const auto b = root["block3d"]) {
    check_keys(b, {"cells", "points", "mu_range", "substrate", "temperature"}, "block3d");
    if (b["cells"]) c.block.cells = count(b["cells"], "block3d.cells");
    if (b["points"]) c.block.points = count(b["points"], "block3d.points");
    if (b["mu_range"]) {
      const auto r = interval(b["mu_range"], "block3d.mu_range");
      c.block.mu_lo = r[0];
      c.block.mu_hi = r[1];
    }
    if (b["substrate"]) c.block.substrate = scalar<double>(b["substrate"], "block3d.substrate");
    if (b["temperature"]) c.block.temperature = scalar<double>(b["temperature"], "block3d.temperature");
  }

  if (c.problem == ProblemKind::custom) {
    const auto g = root["grid"];
    if (!g) throw ConfigError("custom problems need a 'grid' section", line_of(root));
    check_keys(g, {"cells", "extent"}, "grid");
    if (!g["cells"] || !g["extent"] || !g["cells"].IsSequence() || !g["extent"].IsSequence() ||
        g["cells"].size() != g["extent"].size())
      throw ConfigError("grid needs equally long 'cells' and 'extent' lists", line_of(g));
    for (std::size_t a = 0; a < g["cells"].size(); ++a) {
      const auto n = count(g["cells"][a], "grid.cells");
      const auto r = interval(g["extent"][a], "grid.extent");
      if (n < 1) throw ConfigError("grid.cells must be positive", line_of(g["cells"][a]));
      c.grid_axes.push_back(linspace(r[0], r[1], n + 1));
    }
    try {
      TensorGrid check(c.grid_axes);
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of(g));
    }

    if (const auto ps = root["parameters"]) {
      if (!ps.IsSequence()) throw ConfigError("parameters must be a list", line_of(ps));
      for (const auto& p : ps) {
        check_keys(p, {"name", "range", "points"}, "parameters entry");
        AxisSpec a;
        a.name = p["name"] ? scalar<std::string>(p["name"], "parameter name")
                           : "mu_" + std::to_string(c.axes.size() + 1);
        if (!p["range"] || !p["points"]) throw ConfigError("parameter needs range and points", line_of(p));
        const auto r = interval(p["range"], "parameter range");
        a.lo = r[0];
        a.hi = r[1];
        a.points = count(p["points"], "parameter points");
        try {
          ParameterAxis::uniform(a.name, a.lo, a.hi, a.points);
        } catch (const Error& e) {
          throw ConfigError(e.what(), line_of(p));
        }
        for (const auto& other : c.axes)
          if (other.name == a.name) throw ConfigError("duplicate parameter name " + a.name, line_of(p));
        c.axes.push_back(a);
      }
    }
    const std::size_t dim = c.grid_axes.size();
    if (!root["electric"] || !root["thermal"])
      throw ConfigError("custom problems need 'electric' and 'thermal' sections", line_of(root));
    c.electric = field_spec(root["electric"], dim, c.axes, "electric");
    c.thermal = field_spec(root["thermal"], dim, c.axes, "thermal");
  }

  if (const auto s = root["solver"]) {
    check_keys(s, {"tol_fp", "tol_pgd", "max_modes", "max_fp_iters", "zero_mode_tol", "averaging",
                   "linear_solver", "electric_lift", "thermal_lift", "joule_cutoff"},
               "solver");
    if (s["tol_fp"]) c.pgd.tol_fp = scalar<double>(s["tol_fp"], "tol_fp");
    if (s["tol_pgd"]) c.pgd.tol_pgd = scalar<double>(s["tol_pgd"], "tol_pgd");
    if (s["max_modes"]) c.pgd.max_modes = count(s["max_modes"], "max_modes");
    if (s["max_fp_iters"]) c.pgd.max_fp_iters = count(s["max_fp_iters"], "max_fp_iters");
    if (s["zero_mode_tol"]) c.pgd.zero_mode_tol = scalar<double>(s["zero_mode_tol"], "zero_mode_tol");
    if (s["joule_cutoff"]) c.joule_cutoff = scalar<double>(s["joule_cutoff"], "joule_cutoff");
    const auto choice = [&](const char* key, const std::map<std::string, int>& values) -> std::optional<int> {
      if (!s[key]) return std::nullopt;
      const auto v = scalar<std::string>(s[key], key);
      if (!values.count(v)) throw ConfigError(std::string("invalid value '") + v + "' for " + key, line_of(s[key]));
      return values.at(v);
    };
    const std::map<std::string, int> lifts{{"dirichlet", 0}, {"harmonic", 1}};
    if (auto v = choice("averaging", {{"arithmetic", 0}, {"harmonic", 1}}))
      c.options.averaging = *v ? Averaging::harmonic : Averaging::arithmetic;
    if (auto v = choice("linear_solver", {{"direct", 0}, {"cg", 1}}))
      c.options.linear_solver = *v ? LinearSolver::cg : LinearSolver::direct;
    if (auto v = choice("electric_lift", lifts)) c.options.electric_lift = *v ? LiftKind::harmonic : LiftKind::dirichlet;
    if (auto v = choice("thermal_lift", lifts)) c.options.thermal_lift = *v ? LiftKind::harmonic : LiftKind::dirichlet;
    try {
      c.pgd.validate(0);
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of(s));
    }
  }

  if (root["output"]) c.output = scalar<std::string>(root["output"], "output");
  if (const auto o = root["oracle"]) {
    check_keys(o, {"enabled", "budget"}, "oracle");
    if (o["enabled"]) c.oracle = scalar<bool>(o["enabled"], "oracle.enabled");
    if (o["budget"]) c.sweep_budget = count(o["budget"], "oracle.budget");
  }

  if (c.problem == ProblemKind::model1d) {
    if (c.rod.cells < 2 || c.rod.mu_points < 2 || !(c.rod.mu_lo > 0.0) || !(c.rod.mu_lo < c.rod.mu_hi))
      throw ConfigError("model1d needs cells >= 2, mu_points >= 2 and 0 < mu_lo < mu_hi",
                        line_of(root["model1d"] ? root["model1d"] : root));
  }
  if (c.problem == ProblemKind::block3d) {
    if (c.block.cells < 2 || c.block.points < 2 || !(c.block.mu_lo > 0.0) || !(c.block.mu_lo < c.block.mu_hi))
      throw ConfigError("block3d needs cells >= 2, points >= 2 and 0 < mu_lo < mu_hi",
                        line_of(root["block3d"] ? root["block3d"] : root));
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace detail {

/// One separated term per distinct symbol (constants share one term).
inline SeparatedCoefficient build_coefficient(const TensorGrid& grid, const FieldSpec& spec,
                                              const std::vector<ParameterAxis>& axes) {
  std::vector<MaterialValue> cell(grid.n_cells(), spec.background);
  for (const auto& r : spec.regions) {
    const CellField inside = box_indicator(grid, r.box);
    for (std::size_t c = 0; c < grid.n_cells(); ++c)
      if (inside.values[c] > 0.0) cell[c] = r.value;
  }
  SeparatedCoefficient coeff;
  for (std::size_t slot = 0; slot <= axes.size(); ++slot) {
    const bool constant = slot == axes.size();
    CellField f = CellField::constant(grid, 0.0);
    bool any = false;
    for (std::size_t c = 0; c < grid.n_cells(); ++c) {
      const bool match = constant ? !cell[c].axis : cell[c].axis == slot;
      if (match && cell[c].scale != 0.0) {
        f.values[c] = cell[c].scale;
        any = true;
      }
    }
    if (!any) continue;
    std::vector<DenseVector> factors;
    for (std::size_t p = 0; p < axes.size(); ++p)
      factors.push_back(!constant && p == slot ? axes[p].points() : DenseVector(axes[p].size(), 1.0));
    coeff.terms.push_back({std::move(f), std::move(factors)});
  }
  if (coeff.terms.empty()) throw ConfigError("material is zero everywhere", 0);
  return coeff;
}

inline BoundaryCondition build_bc(const TensorGrid& grid, const FieldSpec& spec) {
  BoundaryCondition bc;
  for (const auto& d : spec.dirichlet) bc.set_box(grid, d.box, d.value);
  return bc;
}

}  // namespace detail

/// Problem data described by a configuration.
inline ElectrothermalSetup build_setup(const RunConfig& c) {
  switch (c.problem) {
    case ProblemKind::model1d: return model_problem_1d(c.rod);
    case ProblemKind::block3d: return block_problem_3d(c.block);
    case ProblemKind::custom: break;
  }
  try {
    TensorGrid grid(c.grid_axes);
    std::vector<ParameterAxis> axes;
    for (const auto& a : c.axes) axes.push_back(ParameterAxis::uniform(a.name, a.lo, a.hi, a.points));
    auto sigma = detail::build_coefficient(grid, c.electric, axes);
    auto lambda = detail::build_coefficient(grid, c.thermal, axes);
    auto bc_e = detail::build_bc(grid, c.electric);
    auto bc_t = detail::build_bc(grid, c.thermal);
    return {{grid, std::move(sigma), std::move(bc_e), axes}, std::move(lambda), std::move(bc_t)};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), 0);
  }
}

}  // namespace pgdfit
