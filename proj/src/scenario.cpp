#include "bas_sdre/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bas_sdre/error.hpp"

namespace bas_sdre {
namespace {

namespace pt = boost::property_tree;

enum class ValueType { kDouble, kInt, kUInt, kBool, kString, kDoubleList, kStringList };

struct KeySpec {
  std::string_view section;
  std::string_view key;
  ValueType type;
};

constexpr KeySpec kSchema[] = {
    {"scenario", "name", ValueType::kString},
    {"scenario", "seed", ValueType::kUInt},
    {"scenario", "convergence_eps", ValueType::kDouble},
    {"scenario", "stop_on_converge", ValueType::kBool},
    {"scenario", "divergence_bound", ValueType::kDouble},
    {"system", "benchmark", ValueType::kString},
    {"system", "mass", ValueType::kDouble},
    {"system", "arm_length", ValueType::kDouble},
    {"system", "gravity", ValueType::kDouble},
    {"system", "inertia", ValueType::kDouble},
    {"barrier", "enabled", ValueType::kBool},
    {"barrier", "kind", ValueType::kString},
    {"barrier", "gamma", ValueType::kDouble},
    {"barrier", "mode", ValueType::kString},
    {"cost", "q_diag", ValueType::kDoubleList},
    {"cost", "q_z", ValueType::kDouble},
    {"cost", "r_diag", ValueType::kDoubleList},
    {"controller", "kinds", ValueType::kStringList},
    {"controller", "on_failure", ValueType::kString},
    {"controller", "warm_start", ValueType::kBool},
    {"integrator", "dt", ValueType::kDouble},
    {"integrator", "t_final", ValueType::kDouble},
    {"integrator", "method", ValueType::kString},
    {"integrator", "log_every", ValueType::kInt},
    {"integrator", "h_floor", ValueType::kDouble},
    {"integrator", "refine_boundary", ValueType::kBool},
    {"integrator", "max_refinements", ValueType::kInt},
    {"initial_conditions", "sample_count", ValueType::kInt},
    {"initial_conditions", "sample_lo", ValueType::kDoubleList},
    {"initial_conditions", "sample_hi", ValueType::kDoubleList},
    {"certificate", "enabled", ValueType::kBool},
    {"certificate", "every", ValueType::kInt},
    {"outputs", "directory", ValueType::kString},
};

// Sections whose remaining keys are free-form labels holding number lists.
bool is_list_section(std::string_view section) {
  return section == "obstacles" || section == "initial_conditions";
}

bool is_known_section(std::string_view section) {
  if (is_list_section(section)) return true;
  return std::any_of(std::begin(kSchema), std::end(kSchema),
                     [&](const KeySpec& s) { return s.section == section; });
}

std::optional<ValueType> lookup(std::string_view section, std::string_view key) {
  for (const auto& s : kSchema) {
    if (s.section == section && s.key == key) return s.type;
  }
  if (is_list_section(section)) return ValueType::kDoubleList;
  return std::nullopt;
}

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double parse_double(const std::string& token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    config_error(where + ": '" + token + "' is not a finite number");
  }
  return v;
}

long long parse_int(const std::string& token, const std::string& where) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    config_error(where + ": '" + token + "' is not an integer");
  }
  return v;
}

bool parse_bool(const std::string& token, const std::string& where) {
  if (token == "true" || token == "yes" || token == "1" || token == "on") return true;
  if (token == "false" || token == "no" || token == "0" || token == "off") return false;
  config_error(where + ": '" + token + "' is not a boolean");
}

void check_type(ValueType type, const std::string& value, const std::string& where) {
  switch (type) {
    case ValueType::kDouble: parse_double(value, where); break;
    case ValueType::kInt: parse_int(value, where); break;
    case ValueType::kUInt:
      if (parse_int(value, where) < 0) config_error(where + ": must be non-negative");
      break;
    case ValueType::kBool: parse_bool(value, where); break;
    case ValueType::kString:
      if (value.empty()) config_error(where + ": empty value");
      break;
    case ValueType::kDoubleList:
      for (const auto& tok : split_list(value)) parse_double(tok, where);
      break;
    case ValueType::kStringList: break;
  }
}

std::vector<double> to_doubles(const std::string& value, const std::string& where) {
  std::vector<double> out;
  for (const auto& tok : split_list(value)) out.push_back(parse_double(tok, where));
  return out;
}

void apply_override(pt::ptree& tree, const std::string& override_text) {
  const auto eq = override_text.find('=');
  if (eq == std::string::npos) {
    config_error("override '" + override_text + "' is not of the form section.key=value");
  }
  const std::string path = trim(std::string_view(override_text).substr(0, eq));
  const std::string value = trim(std::string_view(override_text).substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    config_error("override key '" + path + "' must be section.key");
  }
  const std::string section = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  if (!is_known_section(section) || !lookup(section, key)) {
    config_error("unknown override key '" + path + "'");
  }
  check_type(*lookup(section, key), value, "override " + path);
  tree.put(pt::ptree::path_type(section + "\x1f" + key, '\x1f'), value);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text,
                              const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error(std::string("malformed scenario file: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(tree, o);

  ScenarioConfig cfg;
  for (const auto& [section, body] : tree) {
    if (!is_known_section(section)) config_error("unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) {
      config_error("key '" + section + "' outside of any section");
    }
    for (const auto& [key, node] : body) {
      const std::string where = section + "." + key;
      const auto type = lookup(section, key);
      if (!type) config_error("unknown key '" + where + "'");
      const std::string value = trim(node.data());
      check_type(*type, value, where);
      cfg.resolved.emplace_back(where, value);

      if (section == "obstacles") {
        const auto v = to_doubles(value, where);
        if (v.size() != 3) config_error(where + ": expected 'cx cy radius'");
        if (!(v[2] > 0.0)) config_error(where + ": radius must be positive");
        cfg.obstacles.push_back({v[0], v[1], v[2]});
      } else if (section == "initial_conditions" && key.rfind("sample_", 0) != 0) {
        cfg.initial_conditions.push_back(to_doubles(value, where));
      } else if (where == "scenario.name") {
        cfg.name = value;
      } else if (where == "scenario.seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(value, where));
      } else if (where == "scenario.convergence_eps") {
        cfg.convergence_eps = parse_double(value, where);
      } else if (where == "scenario.stop_on_converge") {
        cfg.stop_on_converge = parse_bool(value, where);
      } else if (where == "scenario.divergence_bound") {
        cfg.divergence_bound = parse_double(value, where);
      } else if (where == "system.benchmark") {
        cfg.benchmark = value;
      } else if (where == "system.mass") {
        cfg.quadrotor.mass = parse_double(value, where);
      } else if (where == "system.arm_length") {
        cfg.quadrotor.arm_length = parse_double(value, where);
      } else if (where == "system.gravity") {
        cfg.quadrotor.gravity = parse_double(value, where);
      } else if (where == "system.inertia") {
        cfg.quadrotor.inertia = parse_double(value, where);
      } else if (where == "barrier.enabled") {
        cfg.barrier_enabled = parse_bool(value, where);
      } else if (where == "barrier.kind") {
        cfg.barrier_kind = value;
      } else if (where == "barrier.gamma") {
        cfg.gamma = parse_double(value, where);
      } else if (where == "barrier.mode") {
        if (value == "per_constraint") {
          cfg.mode = BarrierMode::kPerConstraint;
        } else if (value == "aggregated") {
          cfg.mode = BarrierMode::kAggregated;
        } else {
          config_error(where + ": expected per_constraint or aggregated");
        }
      } else if (where == "cost.q_diag") {
        cfg.q_diag = to_doubles(value, where);
      } else if (where == "cost.q_z") {
        cfg.q_z = parse_double(value, where);
      } else if (where == "cost.r_diag") {
        cfg.r_diag = to_doubles(value, where);
      } else if (where == "controller.kinds") {
        for (const auto& tok : split_list(value)) {
          cfg.controllers.push_back(parse_controller_kind(tok));
        }
      } else if (where == "controller.on_failure") {
        if (value == "terminate") {
          cfg.on_failure = FailurePolicy::kTerminate;
        } else if (value == "stale_gain") {
          cfg.on_failure = FailurePolicy::kStaleGain;
        } else {
          config_error(where + ": expected terminate or stale_gain");
        }
      } else if (where == "controller.warm_start") {
        cfg.warm_start = parse_bool(value, where);
      } else if (where == "integrator.dt") {
        cfg.dt = parse_double(value, where);
      } else if (where == "integrator.t_final") {
        cfg.t_final = parse_double(value, where);
      } else if (where == "integrator.method") {
        if (value != "rk4") config_error(where + ": only rk4 is supported");
        cfg.method = value;
      } else if (where == "integrator.log_every") {
        cfg.log_every = static_cast<int>(parse_int(value, where));
      } else if (where == "integrator.h_floor") {
        cfg.h_floor = parse_double(value, where);
      } else if (where == "integrator.refine_boundary") {
        cfg.refine_boundary = parse_bool(value, where);
      } else if (where == "integrator.max_refinements") {
        cfg.max_refinements = static_cast<int>(parse_int(value, where));
      } else if (where == "initial_conditions.sample_count") {
        cfg.sample_count = static_cast<int>(parse_int(value, where));
      } else if (where == "initial_conditions.sample_lo") {
        cfg.sample_lo = to_doubles(value, where);
      } else if (where == "initial_conditions.sample_hi") {
        cfg.sample_hi = to_doubles(value, where);
      } else if (where == "certificate.enabled") {
        cfg.certificate_enabled = parse_bool(value, where);
      } else if (where == "certificate.every") {
        cfg.certificate_every = static_cast<int>(parse_int(value, where));
      } else if (where == "outputs.directory") {
        cfg.output_dir = value;
      }
    }
  }

  if (!(cfg.dt > 0.0)) config_error("integrator.dt must be positive");
  if (!(cfg.t_final > cfg.dt)) config_error("integrator.t_final must exceed dt");
  if (cfg.log_every < 1) config_error("integrator.log_every must be >= 1");
  if (cfg.certificate_every < 1) config_error("certificate.every must be >= 1");
  if (!(cfg.gamma > 0.0)) config_error("barrier.gamma must be positive");
  if (cfg.barrier_kind != "inverse" && cfg.barrier_kind != "log") {
    config_error("barrier.kind must be inverse or log");
  }
  if (cfg.sample_count < 0) config_error("initial_conditions.sample_count < 0");
  if (cfg.max_refinements < 0) config_error("integrator.max_refinements < 0");
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides);
}

SdcSystem make_benchmark(const ScenarioConfig& config) {
  if (config.benchmark == "linear2d") return linear_2d_benchmark();
  if (config.benchmark == "quadrotor") return planar_quadrotor_benchmark(config.quadrotor);
  config_error("unknown benchmark '" + config.benchmark + "'");
}

bool chord_is_safe(const SafetySpec& spec, const VectorXd& x, int grid) {
  for (int k = 0; k <= grid; ++k) {
    if (!(spec.min_margin((static_cast<double>(k) / grid) * x) > 0.0)) return false;
  }
  return true;
}

Scenario build_scenario(const ScenarioConfig& config) {
  Scenario sc;
  sc.config = config;
  SdcSystem base = make_benchmark(config);
  const int n = base.n;
  const int m = base.m;

  sc.monitor.mode = config.mode;
  for (const auto& ob : config.obstacles) {
    sc.monitor.constraints.push_back(
        circle_obstacle(ob.cx, ob.cy, ob.radius, n, base.position_indices));
  }
  const VectorXd origin = VectorXd::Zero(n);
  if (!(sc.monitor.min_margin(origin) > 0.0)) {
    throw Error(ErrorCode::kOriginUnsafe, "an obstacle contains the origin");
  }

  SafetySpec embedded = config.barrier_enabled ? sc.monitor : SafetySpec{};
  BarrierFunction barrier = config.barrier_kind == "log"
                                ? BarrierFunction::logarithmic()
                                : BarrierFunction::inverse();
  auto model = std::make_shared<const AugmentedSystem>(
      std::move(base), std::move(embedded), std::move(barrier), config.gamma);
  sc.model = model;
  const int q = model->q();

  if (config.q_diag.size() != static_cast<std::size_t>(n)) {
    config_error("cost.q_diag needs " + std::to_string(n) + " entries");
  }
  if (config.r_diag.size() != static_cast<std::size_t>(m)) {
    config_error("cost.r_diag needs " + std::to_string(m) + " entries");
  }
  const VectorXd qd = Eigen::Map<const VectorXd>(config.q_diag.data(), n);
  const VectorXd rd = Eigen::Map<const VectorXd>(config.r_diag.data(), m);
  if ((qd.array() < 0.0).any() || !(config.q_z >= 0.0)) {
    config_error("state weights must be non-negative");
  }
  if (!(rd.array() > 0.0).all()) config_error("input weights must be positive");
  const MatrixXd Qx = qd.asDiagonal();
  const MatrixXd R = rd.asDiagonal();
  sc.plant_cost = CostSpec::constant(Qx, R);
  sc.augmented_cost = CostSpec::constant(augmented_state_weight(Qx, config.q_z, q), R);

  for (std::size_t i = 0; i < config.initial_conditions.size(); ++i) {
    const auto& ic = config.initial_conditions[i];
    if (ic.size() != static_cast<std::size_t>(n)) {
      config_error("initial condition " + std::to_string(i) + " needs " +
                   std::to_string(n) + " entries");
    }
    VectorXd x0 = Eigen::Map<const VectorXd>(ic.data(), n);
    if (!(sc.monitor.min_margin(x0) > 0.0)) {
      config_error("initial condition " + std::to_string(i) + " is not strictly safe");
    }
    if (!chord_is_safe(sc.monitor, x0)) {
      config_error("initial condition " + std::to_string(i) +
                   " has no safe chord to the origin");
    }
    sc.initial_conditions.push_back(std::move(x0));
  }

  if (config.sample_count > 0) {
    if (config.sample_lo.size() != static_cast<std::size_t>(n) ||
        config.sample_hi.size() != static_cast<std::size_t>(n)) {
      config_error("sample_lo/sample_hi need " + std::to_string(n) + " entries");
    }
    std::mt19937_64 rng(config.seed);
    std::vector<std::uniform_real_distribution<double>> dists;
    for (int i = 0; i < n; ++i) dists.emplace_back(config.sample_lo[i], config.sample_hi[i]);
    int drawn = 0;
    for (int attempt = 0; drawn < config.sample_count && attempt < 10000 * config.sample_count;
         ++attempt) {
      VectorXd x0(n);
      for (int i = 0; i < n; ++i) x0(i) = dists[i](rng);
      if (sc.monitor.min_margin(x0) > 0.0 && chord_is_safe(sc.monitor, x0)) {
        sc.initial_conditions.push_back(std::move(x0));
        ++drawn;
      }
    }
    if (drawn < config.sample_count) {
      config_error("could not draw enough safe initial conditions from the sampling box");
    }
  }
  return sc;
}

FeedbackLaw make_feedback_law(const Scenario& scenario, ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kBasSdre:
      return FeedbackLaw::bas_sdre(scenario.model, scenario.augmented_cost);
    case ControllerKind::kVanillaSdre:
      return FeedbackLaw::vanilla_sdre(scenario.model, scenario.plant_cost);
    case ControllerKind::kBasLqr:
      return FeedbackLaw::bas_lqr(scenario.model, scenario.augmented_cost);
  }
  config_error("unhandled controller kind");
}

}  // namespace bas_sdre
