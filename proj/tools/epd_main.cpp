// Command-line front end: run / convergence / sweep / plot / mesh.

#include "epd/io.hpp"
#include "epd/sim.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace epd;

namespace {

fs::path output_dir(const SimulationConfig& config, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (!config.output_dir.empty()) return config.output_dir;
  return "out";
}

// file-name tag from the value as typed, e.g. "10ks" or "0.1e6"
std::string tag(const std::string& text) {
  std::string out;
  for (char c : text) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  return out;
}

/// Runs one configuration, streaming the ledger and VTK snapshots to `dir`.
RunResult run_to(const SimulationConfig& config, const fs::path& dir, const std::string& name,
                 bool snapshots) {
  fs::create_directories(dir);
  std::ofstream ledger(dir / (name + ".csv"));
  if (!ledger) throw std::runtime_error("cannot write " + (dir / (name + ".csv")).string());
  write_ledger_header(ledger);
  {
    std::ofstream cfg(dir / (name + ".config"));
    cfg << format_config(config);
  }
  RunHooks hooks;
  hooks.keep_snapshots = false;
  hooks.on_row = [&](const LedgerRow& row) {
    write_ledger_row(ledger, row);
    ledger.flush();
  };
  if (snapshots) {
    hooks.on_snapshot = [&](const Mesh& mesh, const Snapshot& snap) {
      char file[64];
      std::snprintf(file, sizeof file, "%s_step%05d.vtk", name.c_str(), snap.step);
      write_vtk_snapshot(dir / file, mesh, snap.state, snap.sigma);
    };
  }
  return run(config, hooks);
}

void print_row_summary(const std::string& name, const RunResult& r) {
  const auto& last = r.ledger.back();
  std::cout << name << ": " << r.ledger.size() << " steps, terminal balance residual "
            << format_double(last.balance_residual_J) << " J, min zeta " << last.min_zeta;
  if (const auto idx = rupture_index(r.ledger)) {
    std::cout << ", rupture at step " << r.ledger[*idx].step << " (t = " << r.ledger[*idx].time_s / 1e3
              << " ks)";
  } else {
    std::cout << ", no rupture";
  }
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasistatic elastoplasticity with healing gradient damage (2-D)"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::vector<std::string> taus, a2s, ledgers;
  int mesh_level = 2;
  bool no_snapshots = false;

  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  run_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "Output directory");
  run_cmd->add_flag("--no-snapshots", no_snapshots, "Skip VTK snapshots");

  auto* conv_cmd = app.add_subcommand("convergence", "Time-step study of the energy balance");
  conv_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  conv_cmd->add_option("--taus", taus, "Time steps, e.g. 10ks,5ks,1ks")->delimiter(',')->required();
  conv_cmd->add_option("--out", out, "Output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "Damage-viscosity sweep");
  sweep_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--a2", a2s, "a2 values in Pa s, e.g. 10e6,0.1e6,1e3")->delimiter(',')->required();
  sweep_cmd->add_option("--out", out, "Output directory");

  auto* plot_cmd = app.add_subcommand("plot", "SVG plots from ledgers");
  plot_cmd->add_option("--ledgers", ledgers, "Ledger CSV files")->delimiter(',')->required();
  plot_cmd->add_option("--out", out, "Output directory")->required();

  auto* mesh_cmd = app.add_subcommand("mesh", "Export the benchmark mesh as VTK");
  mesh_cmd->add_option("--level", mesh_level, "Refinement level")->check(CLI::NonNegativeNumber);
  mesh_cmd->add_option("--out", out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const SimulationConfig config = parse_config(config_path);
      const RunResult r = run_to(config, output_dir(config, out), "ledger", !no_snapshots);
      print_row_summary("run", r);
    } else if (*conv_cmd) {
      const SimulationConfig base = parse_config(config_path);
      const fs::path dir = output_dir(base, out);
      std::vector<fs::path> files;
      std::vector<double> residuals;
      for (const auto& text : taus) {
        SimulationConfig config = base;
        config.tau_s = parse_duration(text);
        config.validate();
        const std::string name = "ledger_tau" + tag(text);
        const RunResult r = run_to(config, dir, name, false);
        print_row_summary(name, r);
        files.push_back(dir / (name + ".csv"));
        residuals.push_back(r.ledger.back().balance_residual_J);
      }
      const PlotReport report = emit_plots(files, dir);
      std::cout << "terminal |balance residual| "
                << (report.residual_decreasing ? "decreases" : "does not decrease")
                << " in the given tau order\n";
    } else if (*sweep_cmd) {
      const SimulationConfig base = parse_config(config_path);
      const fs::path dir = output_dir(base, out);
      std::vector<fs::path> files;
      for (const auto& text : a2s) {
        SimulationConfig config = base;
        config.material.a2 = parse_double(text);
        config.validate();
        const std::string name = "ledger_a2_" + tag(text);
        const RunResult r = run_to(config, dir, name, false);
        print_row_summary(name, r);
        files.push_back(dir / (name + ".csv"));
      }
      emit_plots(files, dir);
    } else if (*plot_cmd) {
      std::vector<fs::path> files(ledgers.begin(), ledgers.end());
      const PlotReport report = emit_plots(files, out);
      for (const auto& s : report.ledgers) {
        std::cout << s.label << ": terminal balance residual "
                  << format_double(s.terminal_balance_residual_J) << " J, rupture ";
        if (s.rupture_time_s) {
          std::cout << "step " << *s.rupture_step << " (t = " << *s.rupture_time_s / 1e3 << " ks)\n";
        } else {
          std::cout << "none\n";
        }
      }
      std::cout << "wrote " << report.energy_svg.string() << " and " << report.reaction_svg.string()
                << '\n';
    } else if (*mesh_cmd) {
      const Mesh mesh = generate_mesh(Geometry{}, mesh_level);
      write_vtk_mesh(out, mesh);
      std::cout << mesh.num_elements() << " elements, " << mesh.num_nodes() << " nodes\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver aborted: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
