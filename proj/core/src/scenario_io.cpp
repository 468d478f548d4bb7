#include "delaylab/scenario_io.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "delaylab/errors.hpp"
#include "json.hpp"

namespace delaylab {

namespace {

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ValidationError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  return v.get<double>();
}

std::uint64_t as_unsigned(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ParseError(path + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path + ": expected a string");
  return v.get<std::string>();
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

PacketLengthDist distribution_from(const json& v, const std::string& path) {
  if (!v.is_object()) throw ParseError(path + ": expected an object");
  const std::string kind = as_string(require(v, "kind", path), join(path, "kind"));
  PacketLengthDist dist;
  if (kind == "det") {
    reject_unknown_keys(v, {"kind", "bytes"}, path);
    dist = Deterministic{as_number(require(v, "bytes", path), join(path, "bytes"))};
  } else if (kind == "uniform") {
    reject_unknown_keys(v, {"kind", "lo", "hi"}, path);
    dist = Uniform{as_number(require(v, "lo", path), join(path, "lo")),
                   as_number(require(v, "hi", path), join(path, "hi"))};
  } else if (kind == "exp") {
    reject_unknown_keys(v, {"kind", "mean", "truncate_at"}, path);
    Exponential e{as_number(require(v, "mean", path), join(path, "mean")), std::nullopt};
    if (v.contains("truncate_at")) {
      e.truncate_at = as_number(v.at("truncate_at"), join(path, "truncate_at"));
    }
    dist = e;
  } else if (kind == "empirical") {
    reject_unknown_keys(v, {"kind", "points"}, path);
    const json& pts = require(v, "points", path);
    if (!pts.is_array()) throw ParseError(join(path, "points") + ": expected an array");
    Empirical e;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string at = join(path, "points") + "[" + std::to_string(i) + "]";
      if (!pts[i].is_array() || pts[i].size() != 2) {
        throw ParseError(at + ": expected [bytes, weight]");
      }
      e.points.emplace_back(as_number(pts[i][0], at), as_number(pts[i][1], at));
    }
    dist = e;
  } else {
    throw ValidationError(join(path, "kind"), "unknown distribution kind '" + kind + "'");
  }
  validate(dist, path);
  return dist;
}

MacParams mac_from(const json& v, const std::string& path) {
  if (!v.is_object()) throw ParseError(path + ": expected an object");
  reject_unknown_keys(v,
                      {"W", "m", "slot_time_s", "sifs_s", "difs_s", "ack_time_s", "header_bits",
                       "data_rate_bps", "collision_time_s", "include_ack_overhead"},
                      path);
  MacParams mac;
  if (v.contains("W")) mac.W = static_cast<int>(as_unsigned(v.at("W"), join(path, "W")));
  if (v.contains("m")) mac.m = static_cast<int>(as_unsigned(v.at("m"), join(path, "m")));
  const auto number = [&](const char* key, double& out) {
    if (v.contains(key)) out = as_number(v.at(key), join(path, key));
  };
  number("slot_time_s", mac.slot_time);
  number("sifs_s", mac.sifs);
  number("difs_s", mac.difs);
  number("ack_time_s", mac.ack_time);
  number("header_bits", mac.header_bits);
  number("data_rate_bps", mac.data_rate_bps);
  if (v.contains("collision_time_s")) {
    mac.collision_time = as_number(v.at("collision_time_s"), join(path, "collision_time_s"));
  }
  if (v.contains("include_ack_overhead")) {
    const json& flag = v.at("include_ack_overhead");
    if (!flag.is_boolean()) throw ParseError(join(path, "include_ack_overhead") + ": expected a boolean");
    mac.include_ack_overhead = flag.get<bool>();
  }
  mac.validate();
  return mac;
}

RunSettings run_from(const json& v, const std::string& path) {
  if (!v.is_object()) throw ParseError(path + ": expected an object");
  reject_unknown_keys(v, {"replications", "seed", "packet_budget", "horizon_s", "warmup_fraction", "threads"},
                      path);
  RunSettings run;
  if (v.contains("replications")) {
    run.replications = as_unsigned(v.at("replications"), join(path, "replications"));
  }
  if (v.contains("seed")) run.seed = as_unsigned(v.at("seed"), join(path, "seed"));
  if (v.contains("packet_budget")) {
    run.packet_budget = as_unsigned(v.at("packet_budget"), join(path, "packet_budget"));
  }
  if (v.contains("horizon_s")) run.horizon_s = as_number(v.at("horizon_s"), join(path, "horizon_s"));
  if (v.contains("warmup_fraction")) {
    run.warmup_fraction = as_number(v.at("warmup_fraction"), join(path, "warmup_fraction"));
  }
  if (v.contains("threads")) {
    run.threads = static_cast<unsigned>(as_unsigned(v.at("threads"), join(path, "threads")));
  }
  return run;
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv(kSeedEnvVar);
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0') {
    throw ValidationError(kSeedEnvVar, "must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

double mean_packet_bits(const Scenario& s) {
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& n : s.nodes) {
    weighted += n.lambda * raw_moments(n.length).mean;
    total += n.lambda;
  }
  return 8.0 * weighted / total;
}

ExperimentSpec spec_from(const json& doc) {
  if (!doc.is_object()) throw ParseError("scenario: expected a JSON object");
  reject_unknown_keys(doc,
                      {"name", "description", "regime", "mtu_bytes", "capacity_pkts_per_s",
                       "moment_mode", "distribution", "mac", "rows", "run", "engines"},
                      "");

  ExperimentSpec spec;
  if (doc.contains("name")) spec.name = as_string(doc.at("name"), "name");
  if (doc.contains("description")) spec.description = as_string(doc.at("description"), "description");
  if (doc.contains("mac")) spec.mac = mac_from(doc.at("mac"), "mac");
  if (doc.contains("run")) {
    spec.run = run_from(doc.at("run"), "run");
  }
  if (!doc.contains("run") || !doc.at("run").contains("seed")) {
    if (const auto env = seed_from_environment()) spec.run.seed = *env;
  }

  if (doc.contains("engines")) {
    const json& e = doc.at("engines");
    if (!e.is_array()) throw ParseError("engines: expected an array");
    spec.engines = Engines{false, false, false};
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string name = as_string(e[i], "engines[" + std::to_string(i) + "]");
      if (name == "analytic") {
        spec.engines.analytic = true;
      } else if (name == "dcf") {
        spec.engines.dcf = true;
      } else if (name == "rps") {
        spec.engines.rps_oracle = true;
      } else {
        throw ValidationError("engines[" + std::to_string(i) + "]", "unknown engine '" + name + "'");
      }
    }
  }

  Regime regime = Regime::SubMtu;
  const std::string regime_name = as_string(require(doc, "regime", ""), "regime");
  if (regime_name == "sub_mtu") {
    regime = Regime::SubMtu;
  } else if (regime_name == "super_mtu") {
    regime = Regime::SuperMtu;
  } else {
    throw ValidationError("regime", "expected 'sub_mtu' or 'super_mtu'");
  }

  MomentMode mode = MomentMode::Literal;
  if (doc.contains("moment_mode")) {
    const std::string m = as_string(doc.at("moment_mode"), "moment_mode");
    if (m == "literal") {
      mode = MomentMode::Literal;
    } else if (m == "squared_mean") {
      mode = MomentMode::SquaredMean;
    } else {
      throw ValidationError("moment_mode", "expected 'literal' or 'squared_mean'");
    }
  }

  const double mtu = doc.contains("mtu_bytes") ? as_number(doc.at("mtu_bytes"), "mtu_bytes") : 1500.0;
  std::optional<double> capacity;
  if (doc.contains("capacity_pkts_per_s")) {
    capacity = as_number(doc.at("capacity_pkts_per_s"), "capacity_pkts_per_s");
  }
  spec.capacity_from_file = capacity.has_value();

  std::optional<PacketLengthDist> shared;
  if (doc.contains("distribution")) shared = distribution_from(doc.at("distribution"), "distribution");

  const json& rows = require(doc, "rows", "");
  if (!rows.is_array()) throw ParseError("rows: expected an array");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string row_path = "rows[" + std::to_string(r) + "]";
    const json& row = rows[r];
    if (!row.is_object()) throw ParseError(row_path + ": expected an object");
    reject_unknown_keys(row, {"lambda", "distributions"}, row_path);
    const json& lambdas = require(row, "lambda", row_path);
    if (!lambdas.is_array() || lambdas.empty()) {
      throw ValidationError(row_path + ".lambda", "expected a non-empty array");
    }
    std::vector<PacketLengthDist> dists;
    if (row.contains("distributions")) {
      const json& d = row.at("distributions");
      if (!d.is_array() || d.size() != lambdas.size()) {
        throw ValidationError(row_path + ".distributions", "expected one entry per node");
      }
      for (std::size_t i = 0; i < d.size(); ++i) {
        dists.push_back(distribution_from(d[i], row_path + ".distributions[" + std::to_string(i) + "]"));
      }
    } else if (shared) {
      dists.assign(lambdas.size(), *shared);
    } else {
      throw ValidationError(row_path, "no distribution given (set 'distribution' or 'distributions')");
    }

    Scenario s;
    s.mtu_bytes = mtu;
    s.regime = regime;
    s.moment_mode = mode;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const std::string at = row_path + ".lambda[" + std::to_string(i) + "]";
      const double lambda = as_number(lambdas[i], at);
      if (!(lambda > 0.0)) throw ValidationError(at, "arrival rate must be > 0");
      s.nodes.push_back(NodeSpec{lambda, dists[i]});
    }
    if (capacity) {
      s.capacity_pkts_per_s = *capacity;
    } else {
      // MTU-sized packets per second delivered by the saturated cell.
      const Capacity c = aggregate_capacity(spec.mac, static_cast<int>(s.size()), mean_packet_bits(s));
      s.capacity_pkts_per_s = c.units_per_s(8.0 * mtu);
    }
    spec.rows.push_back(std::move(s));
  }

  spec.validate();
  return spec;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (rows.empty()) throw ValidationError("rows", "at least one row required");
  if (!engines.any()) throw ValidationError("engines", "select at least one engine");
  if (run.replications < 1) throw ValidationError("run.replications", "must be >= 1");
  if (!(run.warmup_fraction >= 0.0 && run.warmup_fraction < 1.0)) {
    throw ValidationError("run.warmup_fraction", "must lie in [0, 1)");
  }
  if (run.packet_budget == 0 && !(run.horizon_s > 0.0)) {
    throw ValidationError("run", "packet_budget or horizon_s must be positive");
  }
  mac.validate();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string path = "rows[" + std::to_string(r) + "]";
    try {
      rows[r].validate(path);
    } catch (const InstabilityError& e) {
      std::ostringstream os;
      os << "offered load rho = " << e.rho() << " >= 1 (unstable)";
      throw ValidationError(path + ".lambda", os.str());
    }
  }
}

ExperimentSpec parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  try {
    return spec_from(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
}

ExperimentSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentSpec spec = parse_scenario(buf.str());
  if (spec.name.empty()) spec.name = path.stem().string();
  return spec;
}

PacketLengthDist parse_distribution(std::string_view json_text) {
  try {
    return distribution_from(json::parse(json_text.begin(), json_text.end()), "distribution");
  } catch (const json::exception& e) {
    throw ParseError(std::string("distribution: ") + e.what());
  }
}

}  // namespace delaylab
