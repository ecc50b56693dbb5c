#include "epd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace epd {

void SimulationConfig::validate() const {
  geometry.validate();
  material.validate();
  if (level < 0) throw ConfigError("level", "must be >= 0");
  if (!(tau_s > 0.0)) throw ConfigError("tau_s", "must be > 0");
  if (!(end_time_s >= tau_s)) throw ConfigError("T_s", "must be >= tau_s");
  if (!(initial_stripe_damage >= 0.0 && initial_stripe_damage <= 1.0)) {
    throw ConfigError("initial_stripe_damage", "must lie in [0, 1]");
  }
  if (!std::isfinite(loads.plate_velocity)) {
    throw ConfigError("plate_velocity_m_s", "must be finite");
  }
  if (!adaptive.enabled) num_steps();
}

int SimulationConfig::num_steps() const {
  const double ratio = end_time_s / tau_s;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("T_s", "T / tau must be an integer");
  }
  return static_cast<int>(rounded);
}

double stored_energy(const Mesh& mesh, const MaterialModel<>& material, const DamageOperators& ops,
                     const State& state, const LoadProgram& loads, double t) {
  const auto eel = elastic_strain(mesh, state);
  double elastic = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    elastic += element_geometry(mesh, e).area *
               elastic_energy_density(material, eel[e], element_mean(mesh, e, state.zeta));
  }
  const double stored_damage = -material.b1 * ops.mass.dot(state.zeta);
  const double gradient = 0.5 * state.zeta.dot(ops.stiffness * state.zeta);
  const double load = external_forces(mesh, loads, t).dot(state.u);
  return elastic + stored_damage + gradient - load;
}

double von_mises(const Sym2<double>& sigma) { return dev(sigma).norm(); }

double von_mises(const StressField& sigma, Index element) {
  Sym2<double> s;
  s << sigma(0, element), sigma(2, element), sigma(2, element), sigma(1, element);
  return von_mises(s);
}

double reaction_force(const Mesh& mesh, const StressField& sigma, const Geometry& geometry) {
  const double lo = 0.5 * (geometry.height - geometry.fault_stripe_height);
  const double hi = 0.5 * (geometry.height + geometry.fault_stripe_height);
  double weighted = 0.0, area = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const double y = mesh.centroid(e).y();
    if (y < lo || y > hi) continue;
    const double a = element_geometry(mesh, e).area;
    weighted += a * von_mises(sigma, e);
    area += a;
  }
  if (area <= 0.0) throw std::runtime_error("reaction force: no element centroid in the fault stripe");
  return weighted / area;
}

Simulation::Simulation(SimulationConfig config)
    : config_(std::move(config)),
      mesh_(generate_mesh(config_.geometry, config_.level)),
      ops_(mesh_, config_.material.kappa),
      plastic_(mesh_, config_.material, config_.solver.plastic),
      state_(State::initial(mesh_, initial_damage(mesh_, config_.geometry,
                                                  config_.initial_stripe_damage))) {
  init();
}

Simulation::Simulation(SimulationConfig config, Mesh mesh, State initial)
    : config_(std::move(config)),
      mesh_(std::move(mesh)),
      ops_(mesh_, config_.material.kappa),
      plastic_(mesh_, config_.material, config_.solver.plastic),
      state_(std::move(initial)) {
  init();
}

void Simulation::init() {
  config_.material.validate();
  config_.loads.apply_dirichlet(mesh_, 0.0, state_.u);
  sigma_ = elastic_stress(mesh_, config_.material, state_);
  initial_energy_ = stored_energy(mesh_, config_.material, ops_, state_, config_.loads, 0.0);
}

Simulation::Proposal Simulation::propose(double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("simulation: step must be positive");
  const auto& mat = config_.material;
  const auto& loads = config_.loads;
  const double t_prev = time_;
  const double t = time_ + tau;

  // previous state with the Dirichlet data of the new time level
  State shifted = state_;
  loads.apply_dirichlet(mesh_, t, shifted.u);
  // the work rate is affine in t at frozen state, so the trapezoid is exact
  const double work = 0.5 * tau *
                      (external_work_rate(mesh_, mat, state_, loads, t_prev) +
                       external_work_rate(mesh_, mat, shifted, loads, t));
  const double e_start = stored_energy(mesh_, mat, ops_, shifted, loads, t);

  PlasticStepResult plastic = plastic_.solve(shifted.u, state_.pi, state_.zeta, loads, t);
  State mid{plastic.u, plastic.pi, state_.zeta};
  const double e_mid = stored_energy(mesh_, mat, ops_, mid, loads, t);
  const double dp = plastic_dissipation(mesh_, mat, plastic.pi, state_.pi, state_.zeta);

  DamageStepResult dmg = damage_step(mesh_, mat, elastic_strain(mesh_, mid), state_.zeta, tau,
                                     ops_, config_.solver.qp, qp_start_);
  Proposal p;
  p.tau = tau;
  p.state = State{std::move(plastic.u), std::move(plastic.pi), dmg.zeta};
  const double e_end = stored_energy(mesh_, mat, ops_, p.state, loads, t);
  const double dd = damage_dissipation_increment(mat, ops_.mass, dmg.zeta, state_.zeta, tau);
  p.qp_solution.resize(2 * mesh_.num_nodes());
  p.qp_solution << dmg.z_plus, dmg.z_minus;
  p.sigma = std::move(plastic.sigma);

  LedgerRow& row = p.row;
  row.step = step_ + 1;
  row.time_s = t;
  row.tau_s = tau;
  row.stored_energy_J = e_end;
  row.plastic_diss_inc_J = dp;
  row.damage_diss_inc_J = dd;
  row.external_work_inc_J = work;
  row.plastic_diss_cum_J = plastic_cum_ + dp;
  row.damage_diss_cum_J = damage_cum_ + dd;
  row.external_work_cum_J = work_cum_ + work;
  row.balance_residual_J = e_end + row.plastic_diss_cum_J + row.damage_diss_cum_J -
                           (initial_energy_ + row.external_work_cum_J);
  row.plastic_estimate_slack_J = e_start - (e_mid + dp);
  row.damage_estimate_slack_J = e_mid - (e_end + dd);
  row.energy_scale_J = std::max({std::abs(e_start), std::abs(e_mid), std::abs(e_end)});
  row.newton_iters = plastic.iterations;
  row.qp_iters = dmg.iterations;

  row.reaction_force_Pa = reaction_force(mesh_, p.sigma, config_.geometry);
  row.min_zeta = p.state.zeta.minCoeff();
  row.max_plastic_norm = 0.0;
  row.max_von_mises_Pa = 0.0;
  row.yield_excess_Pa = -std::numeric_limits<double>::infinity();
  for (Index e = 0; e < mesh_.num_elements(); ++e) {
    row.max_plastic_norm =
        std::max(row.max_plastic_norm, plastic_norm(p.state.pi(0, e), p.state.pi(1, e)));
    const double vm = von_mises(p.sigma, e);
    row.max_von_mises_Pa = std::max(row.max_von_mises_Pa, vm);
    row.yield_excess_Pa = std::max(
        row.yield_excess_Pa, vm - yield_stress(mat, element_mean(mesh_, e, state_.zeta)));
  }
  return p;
}

LedgerRow Simulation::commit(Proposal p) {
  state_ = std::move(p.state);
  sigma_ = std::move(p.sigma);
  qp_start_ = std::move(p.qp_solution);
  time_ = p.row.time_s;
  step_ = p.row.step;
  plastic_cum_ = p.row.plastic_diss_cum_J;
  damage_cum_ = p.row.damage_diss_cum_J;
  work_cum_ = p.row.external_work_cum_J;
  return p.row;
}

void Simulation::check_estimates(const LedgerRow& row) const {
  const double allowed = -config_.solver.estimate_tol * std::max(row.energy_scale_J, 1e-300);
  if (row.plastic_estimate_slack_J < allowed || row.damage_estimate_slack_J < allowed) {
    std::ostringstream msg;
    msg << "energy estimate violated at step " << row.step << ": plastic slack "
        << row.plastic_estimate_slack_J << " J, damage slack " << row.damage_estimate_slack_J
        << " J, energy scale " << row.energy_scale_J << " J";
    throw SolverError(msg.str());
  }
}

LedgerRow Simulation::step(double tau) { return accept(propose(tau)); }

LedgerRow Simulation::accept(Proposal p) {
  failed_row.reset();
  try {
    check_estimates(p.row);
  } catch (const SolverError&) {
    failed_row = p.row;
    throw;
  }
  return commit(std::move(p));
}

namespace {

bool on_stride(double t, double stride) {
  if (!(stride > 0.0)) return false;
  const double k = std::round(t / stride);
  return k >= 1.0 && std::abs(t - k * stride) <= 1e-9 * stride;
}

}  // namespace

RunResult run(const SimulationConfig& config, const RunHooks& hooks) {
  config.validate();
  Simulation sim(config);
  RunResult result;
  result.initial_energy_J = sim.initial_energy();

  auto snapshot = [&] {
    Snapshot snap{sim.step_index(), sim.time(), sim.state(), sim.stress()};
    if (hooks.on_snapshot) hooks.on_snapshot(sim.mesh(), snap);
    if (hooks.keep_snapshots) result.snapshots.push_back(std::move(snap));
  };
  auto record = [&](const LedgerRow& row) {
    if (hooks.on_row) hooks.on_row(row);
    result.ledger.push_back(row);
  };
  auto guarded = [&](auto&& advance) {
    try {
      record(advance());
    } catch (const SolverError&) {
      if (sim.failed_row) record(*sim.failed_row);
      throw;
    }
  };

  snapshot();
  const double end = config.end_time_s;
  if (!config.adaptive.enabled) {
    const int n = config.num_steps();
    for (int k = 1; k <= n; ++k) {
      guarded([&] { return sim.step(config.tau_s); });
      if (on_stride(sim.time(), config.snapshot_stride_s) || k == n) snapshot();
    }
  } else {
    double tau = config.tau_s;
    const double eps = 1e-9 * end;
    while (sim.time() < end - eps) {
      const double h = std::min(tau, end - sim.time());
      Simulation::Proposal p = sim.propose(h);
      const double scale = std::max(p.row.energy_scale_J, 1e-300);
      const double gap = (p.row.plastic_estimate_slack_J + p.row.damage_estimate_slack_J) / scale;
      if (gap > config.adaptive.gap_max && 0.5 * h >= config.adaptive.tau_min_s) {
        tau = 0.5 * h;
        continue;
      }
      const double before = sim.time();
      guarded([&] { return sim.accept(std::move(p)); });
      if (gap < config.adaptive.gap_min) tau = std::min(2.0 * tau, config.tau_s);
      if (std::floor(sim.time() / config.snapshot_stride_s) >
              std::floor(before / config.snapshot_stride_s) ||
          sim.time() >= end - eps) {
        snapshot();
      }
    }
  }
  result.mesh = sim.mesh();
  result.final_state = sim.state();
  return result;
}

std::optional<std::size_t> rupture_index(const std::vector<LedgerRow>& ledger) {
  double peak = 0.0;
  for (std::size_t i = 0; i < ledger.size(); ++i) {
    const double r = ledger[i].reaction_force_Pa;
    if (peak > 0.0 && r < 0.5 * peak) return i;
    peak = std::max(peak, r);
  }
  return std::nullopt;
}

}  // namespace epd
