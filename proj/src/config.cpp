#include "epd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace epd {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

struct Key {
  std::string name;
  std::function<void(SimulationConfig&, std::string_view)> set;
  std::function<std::string(const SimulationConfig&)> get;
};

double to_double(const std::string& key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
  }
}

int to_int(const std::string& key, std::string_view v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + std::string(v) + "'");
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

#define EPD_REAL(name, member)                                                           \
  Key {                                                                                  \
    name, [](SimulationConfig& c, std::string_view v) { c.member = to_double(name, v); }, \
        [](const SimulationConfig& c) { return format_double(c.member); }                \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      EPD_REAL("width_m", geometry.width),
      EPD_REAL("height_m", geometry.height),
      EPD_REAL("damaged_stripe_m", geometry.damaged_stripe_height),
      EPD_REAL("fault_stripe_m", geometry.fault_stripe_height),
      Key{"level", [](SimulationConfig& c, std::string_view v) { c.level = to_int("level", v); },
          [](const SimulationConfig& c) { return std::to_string(c.level); }},
      EPD_REAL("lambda1_Pa", material.lambda1),
      EPD_REAL("mu1_Pa", material.mu1),
      EPD_REAL("lambda0_Pa", material.lambda0),
      EPD_REAL("mu0_Pa", material.mu0),
      EPD_REAL("sigma_y1_Pa", material.sigma_y1),
      EPD_REAL("sigma_y0_Pa", material.sigma_y0),
      EPD_REAL("a1_Pa_s", material.a1),
      EPD_REAL("a2_Pa_s", material.a2),
      EPD_REAL("a3_Pa", material.a3),
      EPD_REAL("b1_J_m3", material.b1),
      EPD_REAL("kappa_J_m", material.kappa),
      EPD_REAL("initial_stripe_damage", initial_stripe_damage),
      EPD_REAL("tau_s", tau_s),
      EPD_REAL("T_s", end_time_s),
      EPD_REAL("plate_velocity_m_s", loads.plate_velocity),
      EPD_REAL("body_force_x_N_m3", loads.body_force.x()),
      EPD_REAL("body_force_y_N_m3", loads.body_force.y()),
      EPD_REAL("body_force_rate_x_N_m3_s", loads.body_force_rate.x()),
      EPD_REAL("body_force_rate_y_N_m3_s", loads.body_force_rate.y()),
      EPD_REAL("traction_x_N_m2", loads.traction.x()),
      EPD_REAL("traction_y_N_m2", loads.traction.y()),
      EPD_REAL("traction_rate_x_N_m2_s", loads.traction_rate.x()),
      EPD_REAL("traction_rate_y_N_m2_s", loads.traction_rate.y()),
      EPD_REAL("newton_rtol", solver.plastic.newton_rtol),
      EPD_REAL("newton_atol_N", solver.plastic.newton_atol),
      Key{"newton_max_iter",
          [](SimulationConfig& c, std::string_view v) {
            c.solver.plastic.max_iterations = to_int("newton_max_iter", v);
          },
          [](const SimulationConfig& c) { return std::to_string(c.solver.plastic.max_iterations); }},
      EPD_REAL("qp_tol_kkt", solver.qp.tol_kkt),
      EPD_REAL("qp_tol_comp", solver.qp.tol_comp),
      Key{"qp_max_iter",
          [](SimulationConfig& c, std::string_view v) {
            c.solver.qp.max_iterations = to_int("qp_max_iter", v);
          },
          [](const SimulationConfig& c) { return std::to_string(c.solver.qp.max_iterations); }},
      EPD_REAL("estimate_tol", solver.estimate_tol),
      Key{"adaptive",
          [](SimulationConfig& c, std::string_view v) {
            c.adaptive.enabled = to_bool("adaptive", v);
          },
          [](const SimulationConfig& c) { return std::string(c.adaptive.enabled ? "true" : "false"); }},
      EPD_REAL("adaptive_gap_max", adaptive.gap_max),
      EPD_REAL("adaptive_gap_min", adaptive.gap_min),
      EPD_REAL("adaptive_tau_min_s", adaptive.tau_min_s),
      Key{"output_dir",
          [](SimulationConfig& c, std::string_view v) { c.output_dir = unquote(v); },
          [](const SimulationConfig& c) { return "\"" + c.output_dir + "\""; }},
      EPD_REAL("snapshot_stride_s", snapshot_stride_s),
      Key{"observables",
          [](SimulationConfig& c, std::string_view v) {
            static const std::set<std::string> known{"reaction_force", "min_zeta",
                                                     "max_plastic_norm", "max_von_mises"};
            c.observables.clear();
            std::string item;
            std::istringstream in{std::string(v)};
            while (std::getline(in, item, ',')) {
              const std::string name(trim(item));
              if (name.empty()) continue;
              if (!known.count(name)) throw ConfigError("observables", "unknown observable '" + name + "'");
              c.observables.push_back(name);
            }
          },
          [](const SimulationConfig& c) {
            std::string out;
            for (const auto& o : c.observables) out += (out.empty() ? "" : ",") + o;
            return out;
          }},
  };
  return table;
}

#undef EPD_REAL

// rethrows std::invalid_argument from validate() with the matching key
void validate_with_keys(const SimulationConfig& c) {
  if (!(c.tau_s > 0.0)) throw ConfigError("tau_s", "must be > 0");
  if (!(c.end_time_s > 0.0)) throw ConfigError("T_s", "must be > 0");
  if (c.level < 0) throw ConfigError("level", "must be >= 0");
  const auto& m = c.material;
  if (!(m.mu0 > 0.0)) throw ConfigError("mu0_Pa", "must be > 0");
  if (!(m.mu1 >= m.mu0)) throw ConfigError("mu1_Pa", "must be >= mu0_Pa");
  if (!(m.lambda0 >= 0.0)) throw ConfigError("lambda0_Pa", "must be >= 0");
  if (!(m.lambda1 >= m.lambda0)) throw ConfigError("lambda1_Pa", "must be >= lambda0_Pa");
  if (!(m.sigma_y0 > 0.0)) throw ConfigError("sigma_y0_Pa", "must be > 0");
  if (!(m.sigma_y1 >= m.sigma_y0)) throw ConfigError("sigma_y1_Pa", "must be >= sigma_y0_Pa");
  if (!(m.a1 >= 0.0)) throw ConfigError("a1_Pa_s", "must be >= 0");
  if (!(m.a2 >= 0.0)) throw ConfigError("a2_Pa_s", "must be >= 0");
  if (!(m.a3 >= 0.0)) throw ConfigError("a3_Pa", "must be >= 0");
  if (!(m.b1 >= 0.0)) throw ConfigError("b1_J_m3", "must be >= 0");
  if (!(m.kappa > 0.0)) throw ConfigError("kappa_J_m", "must be > 0");
  try {
    c.geometry.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("damaged_stripe_m", e.what());
  }
  if (!(c.snapshot_stride_s >= 0.0)) throw ConfigError("snapshot_stride_s", "must be >= 0");
  c.validate();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 16);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return out;
}

double parse_duration(std::string_view text) {
  text = trim(text);
  double scale = 1.0;
  if (text.size() > 2 && text.substr(text.size() - 2) == "ks") {
    scale = 1e3;
    text.remove_suffix(2);
  } else if (text.size() > 2 && text.substr(text.size() - 2) == "Ms") {
    scale = 1e6;
    text.remove_suffix(2);
  } else if (text.size() > 1 && text.back() == 's') {
    text.remove_suffix(1);
  }
  return parse_double(text) * scale;
}

SimulationConfig parse_config_text(std::string_view text) {
  SimulationConfig config;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    if (value.empty()) throw ConfigError(key, "missing value");
    it->set(config, value);
  }
  validate_with_keys(config);
  return config;
}

SimulationConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string format_config(const SimulationConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

}  // namespace epd
