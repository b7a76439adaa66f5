// pgdfit: electrothermal PGD surrogates from the command line.
//
//   pgdfit run <config> [-o dir]
//   pgdfit evaluate <archive> --mu v1,v2,... -o <file>
//   pgdfit sweep <config> [-o dir]
//   pgdfit report <archive>
//
// Exit status: 0 success, 1 configuration or argument error, 2 solver error.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pgdfit/archive.hpp"
#include "pgdfit/config.hpp"
#include "pgdfit/driver.hpp"
#include "pgdfit/oracle.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_solver = 2;

int cmd_run(const std::string& path, const std::string& output) {
  auto config = pgdfit::load_config(path);
  if (!output.empty()) config.output = output;
  const auto summary = pgdfit::run_pipeline(config, &std::cout);
  std::cout << "wrote " << config.output << '\n';
  for (const auto* r : {&summary.result.electric.report, &summary.result.thermal.report})
    if (r->termination == pgdfit::Termination::max_modes)
      std::cerr << "warning: max_modes reached before tol_pgd\n";
  return exit_ok;
}

int cmd_sweep(const std::string& path, const std::string& output) {
  auto config = pgdfit::load_config(path);
  if (!output.empty()) config.output = output;
  const auto setup = pgdfit::build_setup(config);
  const auto t0 = std::chrono::steady_clock::now();
  const auto sweep = pgdfit::full_sweep_electrothermal(setup.electric, setup.lambda, setup.thermal_bc,
                                                       config.sweep_budget, config.options.averaging);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::filesystem::create_directories(config.output);
  std::ofstream out(std::filesystem::path(config.output) / "sweep.csv");
  const auto& axes = setup.electric.axes;
  out << "tuple";
  for (const auto& a : axes) out << ',' << a.name();
  out << ",node,electric,thermal\n";
  for (std::size_t k = 0; k < sweep.electric.size(); ++k) {
    const auto mu = pgdfit::collocation_values(axes, sweep.electric.indices[k]);
    for (std::size_t n = 0; n < setup.electric.grid.n_nodes(); ++n) {
      out << k;
      for (double v : mu) out << ',' << pgdfit::format_real(v);
      out << ',' << n << ',' << pgdfit::format_real(sweep.electric.fields[k][n]) << ','
          << pgdfit::format_real(sweep.thermal.fields[k][n]) << '\n';
    }
  }
  std::cout << sweep.electric.solves << " electric + " << sweep.thermal.solves << " thermal solves, " << seconds
            << " s\nwrote " << (std::filesystem::path(config.output) / "sweep.csv").string() << '\n';
  return exit_ok;
}

int cmd_evaluate(const std::string& path, const std::vector<double>& mu, const std::string& output) {
  const auto archive = pgdfit::load_archive(path);
  const auto& axes = archive.fields.front().solution.axes();
  if (mu.size() != axes.size()) {
    std::cerr << "error: archive has " << axes.size() << " parameter(s), got " << mu.size() << " value(s)\n";
    return exit_config;
  }
  for (std::size_t p = 0; p < axes.size(); ++p)
    if (!(mu[p] >= axes[p].lo() && mu[p] <= axes[p].hi())) {
      std::cerr << "error: " << axes[p].name() << " = " << mu[p] << " outside [" << axes[p].lo() << ", "
                << axes[p].hi() << "]\n";
      return exit_config;
    }
  if (output.empty() || output == "-") {
    pgdfit::write_field_csv(std::cout, archive, mu);
  } else {
    std::ofstream out(output);
    if (!out) {
      std::cerr << "error: cannot write " << output << '\n';
      return exit_config;
    }
    pgdfit::write_field_csv(out, archive, mu);
  }
  return exit_ok;
}

int cmd_report(const std::string& path) {
  const auto archive = pgdfit::load_archive(path);
  const pgdfit::TensorGrid grid(archive.grid_axes);
  std::cout << "grid:";
  for (const auto& a : archive.grid_axes) std::cout << ' ' << a.size();
  std::cout << " nodes (" << grid.n_nodes() << " total)\n";
  for (const auto& a : archive.fields.front().solution.axes())
    std::cout << "axis " << a.name() << ": [" << a.lo() << ", " << a.hi() << "], " << a.size() << " points\n";
  for (const auto& f : archive.fields) {
    const auto& s = f.solution;
    std::cout << "field " << f.name << ": " << s.size() << " modes, lift norm "
              << pgdfit::format_real(pgdfit::spatial_norm(grid.node_volumes(), s.lift())) << '\n';
    for (std::size_t m = 0; m < s.size(); ++m)
      std::cout << "  mode " << m + 1 << " magnitude "
                << pgdfit::format_real(pgdfit::spatial_norm(grid.node_volumes(), s.modes()[m].spatial)) << '\n';
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electrothermal PGD surrogates on tensor grids"};
  app.require_subcommand(1);

  std::string config_path, archive_path, output;
  std::vector<double> mu;

  auto* run = app.add_subcommand("run", "solve the configured problem and write artifacts");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("-o,--output", output, "output directory (overrides the config)");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a stored surrogate at one parameter tuple");
  evaluate->add_option("archive", archive_path, "mode archive")->required();
  evaluate->add_option("--mu", mu, "parameter values")->delimiter(',');
  evaluate->add_option("-o,--output", output, "CSV file (default: stdout)");

  auto* sweep = app.add_subcommand("sweep", "brute-force reference: one solve per collocation tuple");
  sweep->add_option("config", config_path, "configuration file")->required();
  sweep->add_option("-o,--output", output, "output directory (overrides the config)");

  auto* report = app.add_subcommand("report", "summarize a mode archive");
  report->add_option("archive", archive_path, "mode archive")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*run) return cmd_run(config_path, output);
    if (*evaluate) return cmd_evaluate(archive_path, mu, output);
    if (*sweep) return cmd_sweep(config_path, output);
    if (*report) return cmd_report(archive_path);
  } catch (const pgdfit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const pgdfit::ArchiveError& e) {
    std::cerr << "archive error: " << e.what() << '\n';
    return exit_config;
  } catch (const pgdfit::OutOfRange& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const pgdfit::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return exit_solver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_solver;
  }
  return exit_config;
}
