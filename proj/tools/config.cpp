#include "config.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ricci::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || errno || *end) throw ConfigError("'" + key + "': not a real number: '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || errno || *end) throw ConfigError("'" + key + "': not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + v + "'");
}

}  // namespace

std::string formulation_name(Formulation f) {
  switch (f) {
    case Formulation::conformal: return "conformal";
    case Formulation::potential: return "potential";
    case Formulation::both: return "both";
  }
  return "?";
}

void parse_initial(const std::string& expr_in, RunConfig& cfg, const std::string& base_dir) {
  const std::string expr = trim(expr_in);
  const auto open = expr.find('(');
  const std::string name = trim(expr.substr(0, open));
  std::string args;
  if (open != std::string::npos) {
    if (expr.back() != ')') throw ConfigError("initial: missing ')' in '" + expr + "'");
    args = expr.substr(open + 1, expr.size() - open - 2);
  }
  InitialData d;
  d.preset = name;
  cfg.initial_snapshot.clear();

  if (name == "round") {
    if (!trim(args).empty()) throw ConfigError("initial: 'round' takes no arguments");
  } else if (name == "bumpy" || name == "ellipsoid") {
    const std::vector<std::string> order =
        name == "bumpy" ? std::vector<std::string>{"eps", "seed"} : std::vector<std::string>{"eps"};
    const auto parts = trim(args).empty() ? std::vector<std::string>{} : split(args, ',');
    if (parts.size() > order.size()) throw ConfigError("initial: too many arguments to '" + name + "'");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::string key = order[i], val = parts[i];
      if (const auto eq = parts[i].find('='); eq != std::string::npos) {
        key = trim(parts[i].substr(0, eq));
        val = trim(parts[i].substr(eq + 1));
      }
      if (key == "eps" || key == "ε") d.eps = to_real("initial.eps", val);
      else if (key == "seed" && name == "bumpy") d.seed = static_cast<std::uint64_t>(to_int("initial.seed", val));
      else throw ConfigError("initial: unknown argument '" + key + "' to '" + name + "'");
    }
  } else if (name == "coeffs") {
    for (const std::string& triple : split(args, ';')) {
      if (triple.empty()) continue;
      std::istringstream ss(triple);
      int l, m;
      double v;
      std::string extra;
      if (!(ss >> l >> m >> v) || (ss >> extra)) throw ConfigError("initial: bad coefficient '" + triple + "'");
      d.coefficients.emplace_back(l, m, v);
    }
  } else if (name == "snapshot") {
    const std::string p = trim(args);
    if (p.empty()) throw ConfigError("initial: snapshot() needs a path");
    std::filesystem::path path(p);
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    if (!std::filesystem::exists(path)) throw ConfigError("initial: snapshot '" + path.string() + "' does not exist");
    cfg.initial_snapshot = path.string();
  } else {
    throw ConfigError("initial: unknown preset '" + name + "'");
  }
  cfg.initial = d;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (cfg.raw.count(key)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    cfg.raw[key] = val;
    try {
      IterationConfig& it = cfg.iteration;
      if (key == "L_max") cfg.L_max = static_cast<int>(to_int(key, val));
      else if (key == "c") cfg.c = to_real(key, val);
      else if (key == "tau") {
        cfg.taus.clear();
        for (const std::string& s : split(val, ',')) cfg.taus.push_back(to_real(key, s));
      } else if (key == "initial") parse_initial(val, cfg, base_dir);
      else if (key == "max_steps") it.max_steps = static_cast<int>(to_int(key, val));
      else if (key == "stop_tol") it.stop_tol = to_real(key, val);
      else if (key == "newton_tol") it.newton_tol = to_real(key, val);
      else if (key == "newton_max") it.newton_max = static_cast<int>(to_int(key, val));
      else if (key == "gauge_every") it.gauge_every = static_cast<int>(to_int(key, val));
      else if (key == "formulation") {
        if (val == "conformal") it.formulation = Formulation::conformal;
        else if (val == "potential") it.formulation = Formulation::potential;
        else if (val == "both") it.formulation = Formulation::both;
        else throw ConfigError("'formulation': expected conformal, potential or both");
      } else if (key == "monotonicity_tol") it.monotonicity_tol = to_real(key, val);
      else if (key == "fault_flip_ding_sign") it.fault_flip_ding_sign = to_bool(key, val);
      else if (key == "out") cfg.out_dir = val;
      else if (key == "snapshots") {
        if (val == "none") cfg.snapshots = SnapshotPolicy::none;
        else if (val == "final") cfg.snapshots = SnapshotPolicy::final;
        else if (val == "all") cfg.snapshots = SnapshotPolicy::all;
        else throw ConfigError("'snapshots': expected none, final or all");
      } else if (key == "check_monotonicity") cfg.check_monotonicity = to_bool(key, val);
      else if (key == "check_step_inequality") cfg.check_step_inequality = to_bool(key, val);
      else if (key == "check_sandwich") cfg.check_sandwich = to_bool(key, val);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, val));
      else if (key == "trials") cfg.trials = static_cast<int>(to_int(key, val));
      else if (key == "verify_L_max") cfg.verify_L_max = static_cast<int>(to_int(key, val));
      else if (key == "jobs") cfg.jobs = static_cast<int>(to_int(key, val));
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  if (cfg.L_max < 4) throw ConfigError("L_max must be at least 4");
  if (cfg.verify_L_max < 4) throw ConfigError("verify_L_max must be at least 4");
  if (!(cfg.c > 0)) throw ConfigError("c must be positive");
  if (cfg.taus.empty()) throw ConfigError("tau list is empty");
  for (double tau : cfg.taus)
    if (!(tau > 0 && tau <= 1)) throw ConfigError("tau entries must lie in (0, 1]");
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
  try {
    IterationConfig probe = cfg.iteration;
    probe.tau = cfg.taus.front();
    validate(probe);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  RunConfig cfg = parse_config(ss.str(), dir.empty() ? "." : dir.string());
  cfg.source_path = path;
  cfg.source_text = ss.str();
  return cfg;
}

}  // namespace ricci::cli
