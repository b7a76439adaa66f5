#pragma once

// Batch pipeline behind the command-line tool: electrothermal PGD, oracle
// sweep, mode archive and CSV artifacts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pgdfit/archive.hpp"
#include "pgdfit/config.hpp"
#include "pgdfit/electrothermal.hpp"
#include "pgdfit/oracle.hpp"
#include "pgdfit/problems.hpp"

namespace pgdfit {

/// 17 significant digits, enough to read back the same double.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct NamedReport {
  std::string name;
  const PgdReport* report;
};

inline void write_report_csv(std::ostream& out, const std::vector<NamedReport>& reports) {
  out << "field,mode,magnitude,fp_iterations,spatial_calls,converged,accepted\n";
  for (const auto& [name, r] : reports)
    for (std::size_t m = 0; m < r->modes.size(); ++m) {
      const auto& mode = r->modes[m];
      out << name << ',' << m + 1 << ',' << format_real(mode.magnitude) << ',' << mode.fp_iterations << ','
          << mode.spatial_calls << ',' << int(mode.converged) << ',' << int(mode.accepted) << '\n';
    }
}

inline void write_fp_trace_csv(std::ostream& out, const std::vector<NamedReport>& reports) {
  out << "field,mode,k,delta,relative_delta\n";
  for (const auto& [name, r] : reports)
    for (std::size_t m = 0; m < r->modes.size(); ++m) {
      const auto& mode = r->modes[m];
      for (std::size_t k = 0; k < mode.deltas.size(); ++k)
        out << name << ',' << m + 1 << ',' << k + 1 << ',' << format_real(mode.deltas[k]) << ','
            << format_real(mode.relative_deltas[k]) << '\n';
    }
}

/// Errors of the truncated surrogate with m modes against the references.
/// Analytic columns are NaN where no closed form exists.
struct ErrorRow {
  std::string field;
  std::size_t modes = 0;
  double magnitude = NAN;
  double energy = NAN;
  double max_l2 = NAN;
  double global_l2 = NAN;
  double analytic = NAN;
  double discretization = NAN;
};

inline void write_error_csv(std::ostream& out, const std::vector<ErrorRow>& rows) {
  out << "field,modes,magnitude,energy_rel_error,max_rel_l2_error,global_rel_l2_error,"
         "analytic_max_rel_l2_error,discretization_error\n";
  for (const auto& r : rows)
    out << r.field << ',' << r.modes << ',' << format_real(r.magnitude) << ',' << format_real(r.energy) << ','
        << format_real(r.max_l2) << ',' << format_real(r.global_l2) << ',' << format_real(r.analytic) << ','
        << format_real(r.discretization) << '\n';
}

using NodalFunction = std::function<double(double x, std::span<const double> mu)>;

/// Max over collocation tuples of the continuous L2 error against a closed form (1D only).
inline double max_analytic_error(const TensorGrid& grid, std::span<const ParameterAxis> axes,
                                 const std::function<DenseVector(std::span<const std::size_t>)>& field,
                                 const NodalFunction& exact) {
  double worst = 0.0;
  for_each_collocation(axes, [&](std::span<const std::size_t> index) {
    const auto mu = collocation_values(axes, index);
    const auto u = field(index);
    worst = std::max(worst, relative_l2_error_1d(grid, u, [&](double x) { return exact(x, mu); }));
  });
  return worst;
}

inline std::vector<ErrorRow> error_vs_modes(const std::string& name, const TensorGrid& grid,
                                            const SeparatedCoefficient& coeff, const PgdResult& result,
                                            const FullSweepSolution& sweep, const NodalFunction& exact,
                                            Averaging averaging = Averaging::arithmetic) {
  std::vector<ErrorRow> rows;
  const auto& s = result.solution;
  double discretization = NAN;
  if (exact)
    discretization = max_analytic_error(
        grid, s.axes(),
        [&](std::span<const std::size_t> index) {
          for (std::size_t k = 0; k < sweep.size(); ++k)
            if (std::equal(index.begin(), index.end(), sweep.indices[k].begin())) return sweep.fields[k];
          throw ContractViolation("sweep lacks a collocation tuple");
        },
        exact);
  std::size_t accepted = 0;
  for (std::size_t m = 0; m <= s.size(); ++m) {
    ErrorRow row;
    row.field = name;
    row.modes = m;
    if (m > 0) {
      while (!result.report.modes[accepted].accepted) ++accepted;
      row.magnitude = result.report.modes[accepted++].magnitude;
    }
    row.energy = energy_relative_error(grid, coeff, s, sweep, m, averaging);
    row.max_l2 = max_relative_error(s, sweep, m);
    row.global_l2 = global_relative_error(grid, s, sweep, m);
    if (exact) {
      row.analytic = max_analytic_error(
          grid, s.axes(), [&](std::span<const std::size_t> index) { return s.evaluate_at(index, m); }, exact);
      row.discretization = discretization;
    }
    rows.push_back(row);
  }
  return rows;
}

struct RunSummary {
  ElectrothermalResult result;
  std::optional<ElectrothermalSweep> sweep;
  std::vector<ErrorRow> errors;
  double pgd_seconds = 0.0;
  double sweep_seconds = 0.0;
};

inline ModeArchive make_archive(const TensorGrid& grid, const ElectrothermalResult& r) {
  return {grid.axes(), {{"electric", r.electric.solution}, {"thermal", r.thermal.solution}}};
}

/// Runs the configured problem and writes modes.pgd, report.csv, fp_trace.csv,
/// error_vs_modes.csv (when the sweep fits the budget) and status.txt into
/// the output directory. On a solver failure status.txt records the error and
/// whatever was finished is still written.
inline RunSummary run_pipeline(const RunConfig& config, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output);
  fs::create_directories(dir);
  const auto setup = build_setup(config);
  const auto& grid = setup.electric.grid;

  RunSummary out;
  std::vector<NamedReport> reports;
  const auto flush_reports = [&] {
    std::ofstream r(dir / "report.csv"), t(dir / "fp_trace.csv");
    write_report_csv(r, reports);
    write_fp_trace_csv(t, reports);
  };
  const auto status = [&](const std::string& s) { std::ofstream(dir / "status.txt") << s << '\n'; };
  status("running");

  try {
    const auto t0 = std::chrono::steady_clock::now();
    out.result.electric = solve_electric(setup.electric, config.pgd, config.options);
    reports.push_back({"electric", &out.result.electric.report});
    ThermalProblem thermal{grid, setup.lambda, setup.thermal_bc, setup.electric.axes,
                           build_joule_source(grid, out.result.electric.solution, setup.electric.sigma,
                                              config.options.averaging, config.joule_cutoff)};
    out.result.thermal = solve_thermal(thermal, config.pgd, config.options);
    reports.push_back({"thermal", &out.result.thermal.report});
    out.pgd_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } catch (const Error& e) {
    flush_reports();
    status(std::string("failed: ") + e.what());
    throw;
  }
  flush_reports();
  save_archive((dir / "modes.pgd").string(), make_archive(grid, out.result));
  if (log)
    *log << "electric: " << out.result.electric.solution.size() << " modes ("
         << to_string(out.result.electric.report.termination) << "), thermal: "
         << out.result.thermal.solution.size() << " modes (" << to_string(out.result.thermal.report.termination)
         << "), spatial calls: "
         << out.result.electric.report.total_spatial_calls + out.result.thermal.report.total_spatial_calls
         << ", " << out.pgd_seconds << " s\n";

  if (config.oracle && collocation_count(setup.electric.axes) <= config.sweep_budget) {
    const auto t0 = std::chrono::steady_clock::now();
    out.sweep = full_sweep_electrothermal(setup.electric, setup.lambda, setup.thermal_bc, config.sweep_budget,
                                          config.options.averaging);
    out.sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    NodalFunction phi, temp;
    if (config.problem == ProblemKind::model1d) {
      const auto rod = config.rod;
      phi = [rod](double x, std::span<const double> mu) {
        return rod.potential * analytic_1d_electric(x, mu[0], rod.half_length);
      };
      temp = [rod](double x, std::span<const double> mu) {
        const double scale = rod.potential * rod.potential;
        return rod.temperature + scale * (analytic_1d_thermal(x, mu[0], rod.half_length, 0.0));
      };
    }
    out.errors = error_vs_modes("electric", grid, setup.electric.sigma, out.result.electric, out.sweep->electric,
                                phi, config.options.averaging);
    auto thermal_rows = error_vs_modes("thermal", grid, setup.lambda, out.result.thermal, out.sweep->thermal, temp,
                                       config.options.averaging);
    out.errors.insert(out.errors.end(), thermal_rows.begin(), thermal_rows.end());
    std::ofstream e(dir / "error_vs_modes.csv");
    write_error_csv(e, out.errors);
    if (log) *log << "oracle sweep: " << out.sweep->electric.solves << " tuples, " << out.sweep_seconds << " s\n";
  } else if (log && config.oracle) {
    *log << "oracle sweep skipped: " << collocation_count(setup.electric.axes) << " tuples exceed budget "
         << config.sweep_budget << '\n';
  }
  status("ok");
  return out;
}

/// Nodal field table: grid coordinates followed by one column per field.
inline void write_field_csv(std::ostream& out, const ModeArchive& archive, std::span<const double> mu) {
  const TensorGrid grid(archive.grid_axes);
  static constexpr const char* names[] = {"x", "y", "z"};
  std::vector<DenseVector> values;
  for (std::size_t a = 0; a < grid.dim(); ++a) out << names[a] << ',';
  for (std::size_t f = 0; f < archive.fields.size(); ++f) {
    out << archive.fields[f].name << (f + 1 < archive.fields.size() ? "," : "\n");
    values.push_back(archive.fields[f].solution.evaluate(mu));
  }
  for (std::size_t n = 0; n < grid.n_nodes(); ++n) {
    const auto x = grid.node_coords(n);
    for (std::size_t a = 0; a < grid.dim(); ++a) out << format_real(x[a]) << ',';
    for (std::size_t f = 0; f < values.size(); ++f)
      out << format_real(values[f][n]) << (f + 1 < values.size() ? "," : "\n");
  }
}

}  // namespace pgdfit
