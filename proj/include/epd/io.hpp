#pragma once

#include "epd/fem.hpp"
#include "epd/mesh.hpp"
#include "epd/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epd {

// ---------------------------------------------------------------- config

/// Flat `key = value` text, `#` starts a comment. Unspecified keys keep
/// the benchmark defaults; unknown keys are rejected.
SimulationConfig parse_config_text(std::string_view text);
SimulationConfig parse_config(const std::filesystem::path& path);

/// Writes every key with its current value; parse_config_text reads it back.
std::string format_config(const SimulationConfig& config);

/// Accepts "10ks", "500s", "2.5e3" (seconds).
double parse_duration(std::string_view text);

/// Shortest round-trip representation with 17 significant digits,
/// scientific, independent of the C locale.
std::string format_double(double value);
double parse_double(std::string_view text);

// ---------------------------------------------------------------- ledger

const std::vector<std::string>& ledger_columns();
void write_ledger_header(std::ostream& out);
void write_ledger_row(std::ostream& out, const LedgerRow& row);
void write_ledger(const std::filesystem::path& path, const std::vector<LedgerRow>& rows);
std::vector<LedgerRow> read_ledger(const std::filesystem::path& path);

/// E0 recovered from a row: stored + dissipation - work - residual.
double initial_energy_of(const LedgerRow& row);

// ---------------------------------------------------------------- vtk

struct VtkData {
  std::string title;
  Eigen::Matrix2Xd points;
  Eigen::Matrix3Xi cells;
  std::map<std::string, Eigen::VectorXd> point_scalars;
  std::map<std::string, Eigen::Matrix2Xd> point_vectors;
  std::map<std::string, Eigen::VectorXd> cell_scalars;
};

/// Legacy ASCII unstructured grid of the mesh, no data.
void write_vtk_mesh(const std::filesystem::path& path, const Mesh& mesh);

/// Fields: one_minus_zeta and displacement (points), plastic_norm and
/// von_mises (cells). The view magnification is recorded in the title only.
void write_vtk_snapshot(const std::filesystem::path& path, const Mesh& mesh, const State& state,
                        const StressField& sigma, double magnification = 12500.0);

VtkData read_vtk(const std::filesystem::path& path);

// ---------------------------------------------------------------- plots

struct LedgerSummary {
  std::string label;
  double terminal_balance_residual_J = 0.0;
  std::optional<int> rupture_step;
  std::optional<double> rupture_time_s;
};

struct PlotReport {
  std::vector<LedgerSummary> ledgers;
  std::filesystem::path energy_svg;
  std::filesystem::path reaction_svg;
  /// Whether |terminal residual| strictly decreases in the given order.
  bool residual_decreasing = false;
};

/// energy_balance.svg: stored + dissipated energy and E0 + external work
/// against time for each ledger; reaction_force.svg: reaction force against
/// time. Throws on an empty ledger.
PlotReport emit_plots(const std::vector<std::filesystem::path>& ledgers,
                      const std::filesystem::path& out_dir);

}  // namespace epd
