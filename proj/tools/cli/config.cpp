#include "cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "mecoff/csv.hpp"

namespace mecoff::cli {

namespace {

const std::map<std::string, std::map<std::string, double>>& unit_table() {
  static const std::map<std::string, std::map<std::string, double>> table = {
      {"time", {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}}},
      {"frequency", {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}},
      {"data", {{"nats", 1.0}, {"nat", 1.0}, {"bits", std::numbers::ln2}, {"bit", std::numbers::ln2}}},
      {"plain", {}},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError("'" + key + "' must be a scalar value");
  return node.Scalar();
}

template <typename Int>
Int parse_integer(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  Int v{};
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) throw ConfigError("'" + key + "' must be an integer");
  return v;
}

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
  }
}

std::vector<double> parse_values(const YAML::Node& node, const std::string& key, const std::string& dimension) {
  std::vector<double> out;
  if (!node.IsSequence()) throw ConfigError("'" + key + "' must be a list");
  for (const auto& item : node) out.push_back(parse_quantity(scalar(item, key), dimension));
  return out;
}

std::string dimension_of(const std::string& param) {
  if (param == "D") return "data";
  if (param == "T" || param == "Tf") return "time";
  if (param == "fe_mu") return "frequency";
  throw ConfigError("unknown sweep parameter '" + param + "' (expected D, T, Tf or fe_mu)");
}

std::string with_unit(double v, const char* unit) {
  std::string s = format_double(v);
  if (unit[0] != '\0') s += std::string(" ") + unit;
  return s;
}

}  // namespace

double parse_quantity(const std::string& text, const std::string& dimension) {
  const auto dim = unit_table().find(dimension);
  if (dim == unit_table().end()) throw ConfigError("unknown dimension " + dimension);
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc()) throw ConfigError("malformed number in '" + text + "'");
  const std::string unit = trim(std::string(ptr, t.data() + t.size()));
  if (unit.empty()) return v;
  const auto it = dim->second.find(unit);
  if (it == dim->second.end()) throw ConfigError("unit '" + unit + "' is not valid for a " + dimension + " value");
  return v * it->second;
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML syntax: ") + e.what());
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  check_keys(root, "<root>", {"task", "edge", "radio", "channel", "numerics", "sweep"});

  if (const auto task = root["task"]) {
    check_keys(task, "task", {"deadline", "data", "cycles_per_nat", "local_cpu_cap", "cpu_coeff"});
    if (task["deadline"]) cfg.task.deadline_T = parse_quantity(scalar(task["deadline"], "deadline"), "time");
    if (task["data"]) cfg.task.data_D = parse_quantity(scalar(task["data"], "data"), "data");
    if (task["cycles_per_nat"]) {
      cfg.task.cycles_per_nat_c0 = parse_quantity(scalar(task["cycles_per_nat"], "cycles_per_nat"), "plain");
    }
    if (task["local_cpu_cap"]) {
      cfg.task.local_cpu_cap_flU = parse_quantity(scalar(task["local_cpu_cap"], "local_cpu_cap"), "frequency");
    }
    if (task["cpu_coeff"]) cfg.task.cpu_coeff_k = parse_quantity(scalar(task["cpu_coeff"], "cpu_coeff"), "plain");
  }
  if (const auto edge = root["edge"]) {
    check_keys(edge, "edge", {"cpu"});
    if (edge["cpu"]) cfg.edge.edge_cpu_fe = parse_quantity(scalar(edge["cpu"], "cpu"), "frequency");
  }
  if (const auto radio = root["radio"]) {
    check_keys(radio, "radio", {"bandwidth", "block_length"});
    if (radio["bandwidth"]) cfg.radio.bandwidth_W = parse_quantity(scalar(radio["bandwidth"], "bandwidth"), "frequency");
    if (radio["block_length"]) {
      cfg.radio.block_len_Tf = parse_quantity(scalar(radio["block_length"], "block_length"), "time");
    }
  }
  {
    const auto ch = root["channel"];
    if (ch) check_keys(ch, "channel", {"mean", "h_min", "h_max"});
    if (ch && ch["mean"]) cfg.channel.mean_mu = parse_quantity(scalar(ch["mean"], "mean"), "plain");
    cfg.channel.h_min = ch && ch["h_min"] ? parse_quantity(scalar(ch["h_min"], "h_min"), "plain")
                                          : 1e-3 * cfg.channel.mean_mu;
    cfg.channel.h_max = ch && ch["h_max"] ? parse_quantity(scalar(ch["h_max"], "h_max"), "plain")
                                          : 50.0 * cfg.channel.mean_mu;
  }
  if (const auto num = root["numerics"]) {
    check_keys(num, "numerics", {"grid_size", "node_count", "tol", "episodes", "seed"});
    if (num["grid_size"]) cfg.numerics.grid_size = parse_integer<int>(scalar(num["grid_size"], "grid_size"), "grid_size");
    if (num["node_count"]) {
      cfg.numerics.node_count = parse_integer<int>(scalar(num["node_count"], "node_count"), "node_count");
    }
    if (num["tol"]) cfg.numerics.tol = parse_quantity(scalar(num["tol"], "tol"), "data");
    if (num["episodes"]) {
      cfg.numerics.episodes = parse_integer<std::uint64_t>(scalar(num["episodes"], "episodes"), "episodes");
    }
    if (num["seed"]) cfg.numerics.seed = parse_integer<std::uint64_t>(scalar(num["seed"], "seed"), "seed");
  }
  if (const auto sw = root["sweep"]) {
    check_keys(sw, "sweep", {"param", "values", "range", "mu_values"});
    SweepSpec spec;
    if (!sw["param"]) throw ConfigError("sweep.param is required");
    spec.param = scalar(sw["param"], "param");
    const std::string dim = dimension_of(spec.param);
    if (sw["values"] && sw["range"]) throw ConfigError("sweep: give either values or range, not both");
    if (sw["values"]) {
      spec.values = parse_values(sw["values"], "values", dim);
    } else if (const auto range = sw["range"]) {
      check_keys(range, "sweep.range", {"start", "stop", "step"});
      if (!range["start"] || !range["stop"] || !range["step"]) throw ConfigError("sweep.range needs start, stop, step");
      const double start = parse_quantity(scalar(range["start"], "start"), dim);
      const double stop = parse_quantity(scalar(range["stop"], "stop"), dim);
      const double step = parse_quantity(scalar(range["step"], "step"), dim);
      if (!(step > 0.0) || stop < start) throw ConfigError("sweep.range must have step > 0 and stop >= start");
      const auto count = static_cast<long>(std::floor((stop - start) / step * (1.0 + 1e-12))) + 1;
      for (long k = 0; k < count; ++k) spec.values.push_back(start + static_cast<double>(k) * step);
    }
    if (sw["mu_values"]) {
      if (spec.param != "fe_mu") throw ConfigError("sweep.mu_values only applies to the fe_mu sweep");
      spec.mu_values = parse_values(sw["mu_values"], "mu_values", "plain");
    } else if (spec.param == "fe_mu") {
      spec.mu_values = {cfg.channel.mean_mu};
    }
    cfg.sweep = spec;
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "task:\n"
     << "  deadline: " << with_unit(c.task.deadline_T, "s") << "\n"
     << "  data: " << with_unit(c.task.data_D, "nats") << "\n"
     << "  cycles_per_nat: " << with_unit(c.task.cycles_per_nat_c0, "") << "\n"
     << "  local_cpu_cap: " << with_unit(c.task.local_cpu_cap_flU, "Hz") << "\n"
     << "  cpu_coeff: " << with_unit(c.task.cpu_coeff_k, "") << "\n"
     << "edge:\n"
     << "  cpu: " << with_unit(c.edge.edge_cpu_fe, "Hz") << "\n"
     << "radio:\n"
     << "  bandwidth: " << with_unit(c.radio.bandwidth_W, "Hz") << "\n"
     << "  block_length: " << with_unit(c.radio.block_len_Tf, "s") << "\n"
     << "channel:\n"
     << "  mean: " << with_unit(c.channel.mean_mu, "") << "\n"
     << "  h_min: " << with_unit(c.channel.h_min, "") << "\n"
     << "  h_max: " << with_unit(c.channel.h_max, "") << "\n"
     << "numerics:\n"
     << "  grid_size: " << c.numerics.grid_size << "\n"
     << "  node_count: " << c.numerics.node_count << "\n"
     << "  tol: " << with_unit(c.numerics.tol, "nats") << "\n"
     << "  episodes: " << c.numerics.episodes << "\n"
     << "  seed: " << c.numerics.seed << "\n";
  if (c.sweep) {
    const char* unit = c.sweep->param == "D" ? "nats" : c.sweep->param == "fe_mu" ? "Hz" : "s";
    os << "sweep:\n  param: " << c.sweep->param << "\n  values: [";
    for (std::size_t i = 0; i < c.sweep->values.size(); ++i) {
      os << (i ? ", " : "") << with_unit(c.sweep->values[i], unit);
    }
    os << "]\n";
    if (!c.sweep->mu_values.empty()) {
      os << "  mu_values: [";
      for (std::size_t i = 0; i < c.sweep->mu_values.size(); ++i) {
        os << (i ? ", " : "") << format_double(c.sweep->mu_values[i]);
      }
      os << "]\n";
    }
  }
  return os.str();
}

void validate_config(const ExperimentConfig& c) {
  try {
    validate(c.task, c.edge, c.radio);
    (void)c.gain_distribution();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.numerics.grid_size < 32) throw ConfigError("numerics.grid_size must be >= 32");
  if (c.numerics.node_count < 8) throw ConfigError("numerics.node_count must be >= 8");
  if (c.numerics.tol < 0.0 || !std::isfinite(c.numerics.tol)) throw ConfigError("numerics.tol must be >= 0");
  if (c.numerics.episodes < 100) throw ConfigError("numerics.episodes must be >= 100");
  if (c.sweep) {
    if (c.sweep->values.empty()) throw ConfigError("sweep must contain at least one value");
    for (double v : c.sweep->values) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("sweep values must be positive");
    }
    for (double v : c.sweep->mu_values) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("sweep mu_values must be positive");
    }
  }
}

}  // namespace mecoff::cli
