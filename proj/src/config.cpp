#include "mixtraffic/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace mixtraffic {

using nlohmann::ordered_json;

namespace {

// Type classes for schema checks. Integers are accepted where a float is
// expected, never the other way round.
bool compatible(const ordered_json& schema, const ordered_json& value) {
  if (schema.is_boolean()) return value.is_boolean();
  if (schema.is_number_integer()) return value.is_number_integer();
  if (schema.is_number()) return value.is_number();
  if (schema.is_string()) return value.is_string();
  if (schema.is_array()) return value.is_array();
  if (schema.is_object()) return value.is_object();
  return false;
}

void check_array_elements(const ordered_json& schema, const ordered_json& value, const std::string& path) {
  if (schema.empty()) return;
  const ordered_json& element_schema = schema.front();
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!compatible(element_schema, value[i])) {
      throw ConfigError("config: " + path + "[" + std::to_string(i) + "] has the wrong type (expected " +
                        element_schema.type_name() + ")");
    }
  }
}

void merge_into(ordered_json& base, const ordered_json& user, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError("config: " + (prefix.empty() ? std::string("root") : prefix) + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
    ordered_json& slot = base[key];
    if (!compatible(slot, value)) {
      throw ConfigError("config: key '" + path + "' expects " + std::string(slot.type_name()) + ", got " +
                        value.type_name());
    }
    if (slot.is_object()) {
      merge_into(slot, value, path);
    } else {
      if (slot.is_array()) check_array_elements(slot, value, path);
      slot = value;
    }
  }
}

template <typename T>
T get(const ordered_json& j, const char* section, const char* key) {
  return j.at(section).at(key).get<T>();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

}  // namespace

ordered_json default_config_json() {
  ordered_json j;
  j["ovm"] = {{"alpha", 0.6}, {"beta", 0.9}, {"s_min", 2.0}, {"s_max", 32.0}, {"v_max", 30.0}};
  j["cacc"] = {{"t_h", 1.0}, {"s_0", 2.0}, {"k_p", 0.45}, {"k_d", 0.25}, {"dt", 0.1}};
  j["lqr"] = {{"q", 1.0}, {"r", 1.0}};
  j["equilibrium"] = {{"v_star", 15.0}};
  j["analyze"] = {{"n", 1000}, {"omega_lo", 1e-2}, {"omega_hi", 1e2}, {"n_freq", 2000}, {"critical_step", 0.1}};
  j["sim"] = {{"n", 100},
              {"topology", "MSL"},
              {"p", 0.2},
              {"m_max", 6},
              {"seed", 1},
              {"dt", 0.1},
              {"t_end", 150.0},
              {"accel_limit", 2.0},
              {"vehicle_length", 5.0},
              {"perturbation", true},
              {"perturbation_accel", 1.0}};
  j["scenarios"] = {{"topologies", {"CACC", "MPF", "MSL"}},
                    {"penetration_rates", {0.1, 0.2, 0.3, 0.4, 0.5}},
                    {"mps", {4, 6, 8}}};
  j["seeds"] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  j["output"] = {{"dir", "out"}, {"format", "csv"}};
  j["jobs"] = 0;
  return j;
}

ordered_json merge_config(const ordered_json& user) {
  ordered_json merged = default_config_json();
  if (!user.is_null()) merge_into(merged, user, "");
  return merged;
}

void apply_override(ordered_json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  ordered_json value = ordered_json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  // Build a nested patch and merge it so the override goes through the same
  // schema checks as a file.
  ordered_json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    require(!part.empty(), "override key '" + key + "' has an empty component");
    parts.push_back(part);
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = ordered_json{{*it, patch}};
  merge_into(config, patch, "");
}

RunConfig parse_config(const ordered_json& j) {
  RunConfig c;
  try {
    auto& ovm = c.params.ovm;
    ovm.alpha = get<double>(j, "ovm", "alpha");
    ovm.beta = get<double>(j, "ovm", "beta");
    ovm.s_min = get<double>(j, "ovm", "s_min");
    ovm.s_max = get<double>(j, "ovm", "s_max");
    ovm.v_max = get<double>(j, "ovm", "v_max");
    auto& cacc = c.params.cacc;
    cacc.t_h = get<double>(j, "cacc", "t_h");
    cacc.s_0 = get<double>(j, "cacc", "s_0");
    cacc.k_p = get<double>(j, "cacc", "k_p");
    cacc.k_d = get<double>(j, "cacc", "k_d");
    cacc.dt = get<double>(j, "cacc", "dt");
    c.params.lqr_q = get<double>(j, "lqr", "q");
    c.params.lqr_r = get<double>(j, "lqr", "r");
    c.params.v_star = get<double>(j, "equilibrium", "v_star");
    c.params.validate();
    require(c.params.v_star > 0 && c.params.v_star < ovm.v_max, "equilibrium.v_star must lie in (0, ovm.v_max)");

    c.analyze.n = get<int>(j, "analyze", "n");
    c.analyze.omega_lo = get<double>(j, "analyze", "omega_lo");
    c.analyze.omega_hi = get<double>(j, "analyze", "omega_hi");
    c.analyze.n_freq = get<int>(j, "analyze", "n_freq");
    c.analyze.critical_step = get<double>(j, "analyze", "critical_step");
    require(c.analyze.n >= 1, "analyze.n must be positive");
    require(c.analyze.omega_lo > 0 && c.analyze.omega_hi > c.analyze.omega_lo,
            "analyze.omega_lo must be positive and below analyze.omega_hi");
    require(c.analyze.n_freq >= 2, "analyze.n_freq must be at least 2");
    require(c.analyze.critical_step > 0 && c.analyze.critical_step <= 1, "analyze.critical_step must lie in (0, 1]");

    const auto& sim = j.at("sim");
    c.sim.n = sim.at("n").get<int>();
    const auto topo = parse_strategy(sim.at("topology").get<std::string>());
    require(topo.has_value(), "sim.topology must be one of CACC, MPF, MSL");
    c.sim.strategy = *topo;
    c.sim.p = sim.at("p").get<double>();
    c.sim.m_max = sim.at("m_max").get<int>();
    require(sim.at("seed").get<long long>() >= 0, "sim.seed must be non-negative");
    c.sim.seed = sim.at("seed").get<std::uint64_t>();
    c.sim.dt = sim.at("dt").get<double>();
    c.sim.t_end = sim.at("t_end").get<double>();
    c.sim.accel_limit = sim.at("accel_limit").get<double>();
    c.sim.vehicle_length = sim.at("vehicle_length").get<double>();
    c.sim.perturbation = sim.at("perturbation").get<bool>();
    c.sim.perturbation_accel = sim.at("perturbation_accel").get<double>();
    c.sim.params = c.params;
    c.sim.validate();

    std::set<Strategy> strategies;
    for (const auto& name : j.at("scenarios").at("topologies")) {
      const auto s = parse_strategy(name.get<std::string>());
      require(s.has_value(), "scenarios.topologies entries must be CACC, MPF or MSL");
      strategies.insert(*s);
    }
    c.strategies.assign(strategies.begin(), strategies.end());

    std::set<double> rates;
    for (const auto& p : j.at("scenarios").at("penetration_rates")) {
      const double v = p.get<double>();
      require(v >= 0 && v <= 1, "scenarios.penetration_rates entries must lie in [0, 1]");
      rates.insert(v);
    }
    c.penetration_rates.assign(rates.begin(), rates.end());

    std::set<int> mps;
    for (const auto& m : j.at("scenarios").at("mps")) {
      require(m.get<int>() >= 2, "scenarios.mps entries must be at least 2");
      mps.insert(m.get<int>());
    }
    c.mps.assign(mps.begin(), mps.end());

    for (const auto& s : j.at("seeds")) {
      require(s.get<long long>() >= 0, "seeds must be non-negative");
      c.seeds.push_back(s.get<std::uint64_t>());
    }

    c.output_dir = j.at("output").at("dir").get<std::string>();
    const auto format = j.at("output").at("format").get<std::string>();
    require(format == "csv" || format == "json", "output.format must be csv or json");
    c.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    c.jobs = j.at("jobs").get<int>();
    require(c.jobs >= 0, "jobs must be non-negative");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ordered_json RunConfig::to_json() const {
  ordered_json j = default_config_json();
  j["ovm"] = {{"alpha", params.ovm.alpha},
              {"beta", params.ovm.beta},
              {"s_min", params.ovm.s_min},
              {"s_max", params.ovm.s_max},
              {"v_max", params.ovm.v_max}};
  j["cacc"] = {{"t_h", params.cacc.t_h},
               {"s_0", params.cacc.s_0},
               {"k_p", params.cacc.k_p},
               {"k_d", params.cacc.k_d},
               {"dt", params.cacc.dt}};
  j["lqr"] = {{"q", params.lqr_q}, {"r", params.lqr_r}};
  j["equilibrium"] = {{"v_star", params.v_star}};
  j["analyze"] = {{"n", analyze.n},
                  {"omega_lo", analyze.omega_lo},
                  {"omega_hi", analyze.omega_hi},
                  {"n_freq", analyze.n_freq},
                  {"critical_step", analyze.critical_step}};
  j["sim"] = {{"n", sim.n},
              {"topology", std::string(to_string(sim.strategy))},
              {"p", sim.p},
              {"m_max", sim.m_max},
              {"seed", sim.seed},
              {"dt", sim.dt},
              {"t_end", sim.t_end},
              {"accel_limit", sim.accel_limit},
              {"vehicle_length", sim.vehicle_length},
              {"perturbation", sim.perturbation},
              {"perturbation_accel", sim.perturbation_accel}};
  ordered_json topologies = ordered_json::array();
  for (auto s : strategies) topologies.push_back(std::string(to_string(s)));
  j["scenarios"] = {{"topologies", topologies}, {"penetration_rates", penetration_rates}, {"mps", mps}};
  j["seeds"] = seeds;
  j["output"] = {{"format", format == OutputFormat::Csv ? "csv" : "json"}};
  j["jobs"] = jobs;
  return j;
}

ordered_json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  ordered_json user = ordered_json::parse(in, nullptr, false);
  if (user.is_discarded()) throw ConfigError("config: '" + path.string() + "' is not valid JSON");
  return user;
}

}  // namespace mixtraffic
