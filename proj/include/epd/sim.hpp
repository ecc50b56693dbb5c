#pragma once

#include "epd/damage.hpp"
#include "epd/fem.hpp"
#include "epd/material.hpp"
#include "epd/mesh.hpp"
#include "epd/plasticity.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace epd {

struct SolverSettings {
  PlasticTolerances plastic;
  QPOptions qp;
  /// Allowed relative violation of the per-step energy estimates.
  double estimate_tol = 1e-8;
};

/// Step-size control from the per-step energy gap. Off by default.
struct AdaptiveSettings {
  bool enabled = false;
  double gap_max = 1e-6;  ///< halve tau above this relative gap
  double gap_min = 1e-9;  ///< double tau below this relative gap
  double tau_min_s = 1.0;
};

struct SimulationConfig {
  Geometry geometry;
  int level = 2;
  MaterialModel<> material;
  double initial_stripe_damage = 0.5;
  double tau_s = 1e3;
  double end_time_s = 400e3;
  LoadProgram loads;
  SolverSettings solver;
  AdaptiveSettings adaptive;
  std::string output_dir;
  double snapshot_stride_s = 20e3;
  std::vector<std::string> observables{"reaction_force", "min_zeta", "max_plastic_norm",
                                       "max_von_mises"};

  void validate() const;
  /// T / tau; throws when it is not an integer.
  int num_steps() const;
};

/// One row per completed step. Energies in J per unit thickness.
struct LedgerRow {
  int step = 0;
  double time_s = 0.0;
  double stored_energy_J = 0.0;
  double plastic_diss_cum_J = 0.0;
  double damage_diss_cum_J = 0.0;
  double external_work_cum_J = 0.0;
  double balance_residual_J = 0.0;
  double reaction_force_Pa = 0.0;
  double min_zeta = 0.0;
  double max_plastic_norm = 0.0;
  int newton_iters = 0;
  int qp_iters = 0;
  // diagnostics beyond the core columns
  double tau_s = 0.0;
  double plastic_diss_inc_J = 0.0;
  double damage_diss_inc_J = 0.0;
  double external_work_inc_J = 0.0;
  double plastic_estimate_slack_J = 0.0;
  double damage_estimate_slack_J = 0.0;
  double energy_scale_J = 0.0;
  double max_von_mises_Pa = 0.0;
  double yield_excess_Pa = 0.0;
};

/// E = sum_T area 1/2 C(mean zeta) e_el:e_el - sum_i m_i b1 zeta_i
///     + 1/2 zeta^T K zeta - int g.u - int_GN f.u
double stored_energy(const Mesh& mesh, const MaterialModel<>& material, const DamageOperators& ops,
                     const State& state, const LoadProgram& loads, double t);

/// Frobenius norm of the 2-D deviatoric part.
double von_mises(const Sym2<double>& sigma);
double von_mises(const StressField& sigma, Index element);

/// Area-weighted mean of |dev sigma| over elements whose centroid lies in
/// the centred fault stripe.
double reaction_force(const Mesh& mesh, const StressField& sigma, const Geometry& geometry);

struct Snapshot {
  int step = 0;
  double time_s = 0.0;
  State state;
  StressField sigma;
};

/// Owns the state of one run and advances it by fractional steps:
/// elastoplastic minimization at frozen damage, then the damage QP.
class Simulation {
 public:
  explicit Simulation(SimulationConfig config);
  Simulation(SimulationConfig config, Mesh mesh, State initial);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const Mesh& mesh() const { return mesh_; }
  const SimulationConfig& config() const { return config_; }
  const State& state() const { return state_; }
  const StressField& stress() const { return sigma_; }
  double time() const { return time_; }
  int step_index() const { return step_; }
  double initial_energy() const { return initial_energy_; }

  /// Result of a step that has not been committed yet.
  struct Proposal {
    double tau = 0.0;
    State state;
    StressField sigma;
    Eigen::VectorXd qp_solution;
    LedgerRow row;
  };

  /// Computes the step from the current state without changing it.
  Proposal propose(double tau) const;
  LedgerRow commit(Proposal proposal);

  /// propose + estimate check + commit. Throws SolverError when a solver
  /// fails or an energy estimate is violated beyond tolerance; `failed_row`
  /// then holds the offending row.
  LedgerRow step(double tau);
  /// Estimate check + commit of an existing proposal.
  LedgerRow accept(Proposal proposal);

  std::optional<LedgerRow> failed_row;

 private:
  void init();
  void check_estimates(const LedgerRow& row) const;

  SimulationConfig config_;
  Mesh mesh_;
  DamageOperators ops_;
  ElastoplasticSolver plastic_;
  State state_;
  StressField sigma_;
  std::optional<Eigen::VectorXd> qp_start_;
  double time_ = 0.0;
  int step_ = 0;
  double initial_energy_ = 0.0;
  double plastic_cum_ = 0.0;
  double damage_cum_ = 0.0;
  double work_cum_ = 0.0;
};

struct RunHooks {
  std::function<void(const LedgerRow&)> on_row;
  std::function<void(const Mesh&, const Snapshot&)> on_snapshot;
  bool keep_snapshots = true;
};

struct RunResult {
  Mesh mesh;
  double initial_energy_J = 0.0;
  std::vector<LedgerRow> ledger;
  std::vector<Snapshot> snapshots;
  State final_state;
};

/// Runs T / tau steps (or adaptive steps up to T). Rows and snapshots are
/// passed to the hooks as they are produced, so a failure leaves them written.
RunResult run(const SimulationConfig& config, const RunHooks& hooks = {});

/// First step at which the reaction force falls below half of its running
/// peak; nullopt if it never does.
std::optional<std::size_t> rupture_index(const std::vector<LedgerRow>& ledger);

}  // namespace epd
