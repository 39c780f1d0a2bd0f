#include "commands.hpp"

#include "ricci/random_fields.hpp"
#include "ricci/snapshot.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace ricci::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string git_blob_sha1(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr)) throw Error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Files written by one command, for the manifest.
class OutputLog {
 public:
  explicit OutputLog(fs::path root) : root_(std::move(root)) {}

  void write(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    os << content;
    if (!os) throw Error("failed writing '" + path.string() + "'");
    std::lock_guard lock(mu_);
    entries_.emplace_back(fs::relative(path, root_).generic_string(), git_blob_sha1(content));
  }

  json to_json() {
    std::lock_guard lock(mu_);
    std::sort(entries_.begin(), entries_.end());
    json arr = json::array();
    for (const auto& [p, h] : entries_) arr.push_back({{"path", p}, {"git_sha1", h}});
    return arr;
  }

 private:
  fs::path root_;
  std::mutex mu_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.raw) j[k] = v;
  return j;
}

json inputs_json(const RunConfig& cfg) {
  json arr = json::array();
  if (!cfg.source_path.empty())
    arr.push_back({{"role", "config"}, {"path", cfg.source_path}, {"git_sha1", git_blob_sha1(cfg.source_text)}});
  if (!cfg.initial_snapshot.empty())
    arr.push_back({{"role", "initial_snapshot"},
                   {"path", cfg.initial_snapshot},
                   {"git_sha1", git_blob_sha1(read_file(cfg.initial_snapshot))}});
  return arr;
}

json map_json(const MobiusMap& h) {
  json arr = json::array();
  for (double x : h.to_array()) arr.push_back(x);
  return arr;
}

double user_scale(const RunConfig& cfg) { return 1.0 / (2.0 * std::numbers::pi * cfg.c); }

Eigen::VectorXd resize_coeffs(const Eigen::VectorXd& c, int L_from, int L_to) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_coeffs(L_to));
  for (int l = 0; l <= std::min(L_from, L_to); ++l)
    for (int m = -l; m <= l; ++m) out(lm_index(l, m)) = c(lm_index(l, m));
  return out;
}

ConformalMetric initial_metric(const RunConfig& cfg, const GridPtr& grid) {
  if (cfg.initial_snapshot.empty()) return ConformalMetric(initial_field(cfg.initial, grid), kFourPi);
  const Snapshot s = read_snapshot(cfg.initial_snapshot);
  if (s.L_max > grid->L_max())
    throw ConfigError("initial snapshot has L_max " + std::to_string(s.L_max) + " > configured L_max");
  if (s.has_field("u"))
    return ConformalMetric(Field::from_coeffs(grid, resize_coeffs(s.field("u"), s.L_max, grid->L_max())), kFourPi);
  if (s.has_field("psi")) {
    const ReferencePtr ref = round_reference(grid);
    const Field psi = Field::from_coeffs(grid, resize_coeffs(s.field("psi"), s.L_max, grid->L_max()));
    return u_from_psi({(kFourPi / s.V) * psi, ref});
  }
  throw ConfigError("initial snapshot has neither a 'u' nor a 'psi' field");
}

Snapshot state_snapshot(const IterationState& st, const RunConfig& cfg) {
  const double lambda = user_scale(cfg);
  Snapshot s;
  s.L_max = st.metric.grid().L_max();
  s.V = lambda * kFourPi;
  s.metadata["kind"] = "iteration_state";
  s.metadata["k"] = std::to_string(st.k);
  s.metadata["tau"] = fmt17(st.tau);
  std::string g;
  for (double x : st.gauge.to_array()) g += (g.empty() ? "" : ",") + fmt17(x);
  s.metadata["gauge"] = g;
  s.fields.emplace_back("u", st.metric.u().coeffs());
  s.fields.emplace_back("psi", lambda * st.psi_prime.psi.coeffs());
  s.fields.emplace_back("u_balanced", st.balanced.u().coeffs());
  return s;
}

std::string snapshot_text(const Snapshot& s) {
  std::ostringstream os;
  write_snapshot(os, s);
  return os.str();
}

struct RunResult {
  json report;
  int code = kOk;
  std::optional<ConformalMetric> final_balanced;
};

RunResult run_one(const RunConfig& cfg, double tau, const ConformalMetric& m0, const fs::path& dir,
                  OutputLog& outputs) {
  IterationConfig it = cfg.iteration;
  it.tau = tau;
  if (!cfg.check_monotonicity) it.monotonicity_tol = std::numeric_limits<double>::infinity();
  const double lambda = user_scale(cfg);

  std::string csv = energy_csv_header() + "\n";
  json gauges = json::array();
  std::optional<IterationState> last;
  auto observe = [&](const IterationState& s) {
    csv += energy_csv_row(s.energies) + "\n";
    gauges.push_back({{"k", s.k}, {"map", map_json(s.gauge)}});
    if (cfg.snapshots == SnapshotPolicy::all) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshots/state_%05d.snap", s.k);
      outputs.write(dir / name, snapshot_text(state_snapshot(s, cfg)));
    }
    last = s;
  };

  RunResult res;
  json& r = res.report;
  r["tau"] = tau;
  r["directory"] = dir.filename().string();
  std::optional<Trajectory> traj;
  try {
    traj = run(m0, it, observe);
  } catch (const MonotonicityViolation& e) {
    r["termination"] = "monotonicity_violation";
    r["error"] = e.what();
    res.code = kCheckFailure;
  } catch (const Error& e) {
    r["termination"] = "solver_failure";
    r["error"] = e.what();
    res.code = kSolverFailure;
  }

  if (traj) {
    const IterationState& end = traj->states.back();
    const EnergyRecord& e = end.energies;
    r["termination"] = to_string(traj->termination);
    r["error"] = nullptr;
    r["steps"] = end.k;
    r["final_curvature_dev"] = traj->final_curvature_dev / lambda;
    r["final_curvature_dev_internal"] = traj->final_curvature_dev;
    r["final_increment"] = end.increment;
    r["final_sandwich_gap"] = std::abs(e.Mabuchi - e.f_mean - e.Ding);
    r["final_d1_proxy_to_KE"] = e.d1_proxy_to_KE;
    r["min_step_slack"] = traj->min_step_slack;
    r["min_sandwich_slack"] = traj->min_sandwich_slack;
    r["max_ding_increase"] = traj->max_ding_increase;
    r["max_form_mismatch"] = traj->max_form_mismatch;
    json checks = json::object();
    checks["monotonicity"] = cfg.check_monotonicity ? json(traj->max_ding_increase <= it.monotonicity_tol) : json();
    checks["step_inequality"] = cfg.check_step_inequality ? json(traj->min_step_slack >= -1e-9) : json();
    checks["sandwich"] = cfg.check_sandwich ? json(traj->min_sandwich_slack >= -1e-9) : json();
    r["checks"] = checks;
    for (const auto& [name, v] : checks.items())
      if (v.is_boolean() && !v.get<bool>()) res.code = kCheckFailure;
    res.final_balanced = end.balanced;
  } else {
    r["steps"] = last ? last->k : 0;
  }
  r["gauge_maps"] = gauges;

  if (cfg.snapshots == SnapshotPolicy::final && last)
    outputs.write(dir / "snapshots/final.snap", snapshot_text(state_snapshot(*last, cfg)));
  outputs.write(dir / "energies.csv", csv);
  outputs.write(dir / "report.json", r.dump(2) + "\n");
  return res;
}

json grid_json(const SphereGrid& g) {
  return {{"L_max", g.L_max()}, {"n_lat", g.n_lat()}, {"n_lon", g.n_lon()}, {"sizing", "dealiased"}};
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_run(const RunConfig& cfg, std::ostream& log) {
  const fs::path root(cfg.out_dir);
  fs::create_directories(root);
  OutputLog outputs(root);

  GridPtr grid;
  ConformalMetric m0;
  try {
    grid = make_grid(cfg.L_max, GridSizing::dealiased);
    m0 = initial_metric(cfg, grid);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SnapshotFormatError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    log << "solver failure while preparing initial data: " << e.what() << "\n";
    return kSolverFailure;
  }

  const int n = static_cast<int>(cfg.taus.size());
  std::vector<RunResult> results(n);
  std::vector<fs::path> dirs(n);
  for (int i = 0; i < n; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "run_%02d_tau_%g", i, cfg.taus[i]);
    dirs[i] = root / name;
  }
  std::atomic<int> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (int i; (i = next++) < n;) {
      results[i] = run_one(cfg, cfg.taus[i], m0, dirs[i], outputs);
      std::lock_guard lock(log_mu);
      const json& r = results[i].report;
      log << "tau=" << cfg.taus[i] << ": " << r["termination"].get<std::string>() << " after " << r["steps"]
          << " steps";
      if (r.contains("final_curvature_dev")) log << ", |R - 8pi/V|_inf = " << r["final_curvature_dev"];
      if (!r["error"].is_null()) log << " (" << r["error"].get<std::string>() << ")";
      log << "\n";
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::min(cfg.jobs, n); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = kOk;
  json runs = json::array();
  for (const auto& r : results) {
    code = std::max(code, r.code);
    json brief = r.report;
    brief.erase("gauge_maps");
    runs.push_back(brief);
  }

  // Balanced limits of different τ are compared as potentials over the
  // round reference.
  json pairs = json::array();
  double worst = 0.0;
  const ReferencePtr ref = round_reference(grid);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!results[i].final_balanced || !results[j].final_balanced) continue;
      const double d = d1_proxy(psi_from_u(*results[i].final_balanced, ref), psi_from_u(*results[j].final_balanced, ref));
      worst = std::max(worst, d);
      pairs.push_back({{"tau_a", cfg.taus[i]}, {"tau_b", cfg.taus[j]}, {"d1_proxy", d}});
    }

  json report;
  report["runs"] = runs;
  report["cross_tau"] = {{"pairs", pairs}, {"max_d1_proxy", pairs.empty() ? json() : json(worst)}};
  report["exit_code"] = code;
  outputs.write(root / "report.json", report.dump(2) + "\n");
  if (!pairs.empty()) log << "cross-tau max d1_proxy = " << worst << "\n";

  json manifest;
  manifest["format"] = "ricci-run-manifest 1";
  manifest["command"] = "run";
  manifest["config"] = config_json(cfg);
  manifest["inputs"] = inputs_json(cfg);
  manifest["grid"] = grid_json(*grid);
  manifest["scaling"] = {{"c", cfg.c},
                         {"V", 2.0 / cfg.c},
                         {"internal_V", kFourPi},
                         {"scale", user_scale(cfg)},
                         {"energies", "internal class, V = 4pi"},
                         {"snapshots", "u is scale invariant; psi is multiplied by scale"}};
  manifest["seed"] = cfg.seed;
  manifest["outputs"] = outputs.to_json();
  manifest["exit_code"] = code;
  manifest["timestamp"] = utc_timestamp();
  std::ofstream(root / "manifest.json") << manifest.dump(2) << "\n";
  return code;
}

// ---------------------------------------------------------------------------

namespace {

struct Check {
  Check(std::string n, double tol, bool rel = false) : name(std::move(n)), tolerance(tol), relative(rel) {}

  std::string name;
  double tolerance;
  bool relative;
  int trials = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::string note;

  void add(double slack) {
    ++trials;
    worst = std::min(worst, slack);
  }
  bool passed() const { return trials > 0 && worst >= -tolerance; }
  json to_json() const {
    json j;
    j["name"] = name;
    j["trials"] = trials;
    j["worst_slack"] = trials ? json(worst) : json();
    j["tolerance"] = tolerance;
    j["relative"] = relative;
    j["passed"] = passed();
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

}  // namespace

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const fs::path root(cfg.out_dir);
  fs::create_directories(root);
  OutputLog outputs(root);

  const GridPtr grid = make_grid(cfg.verify_L_max, GridSizing::dealiased);
  const int L = grid->L_max();
  const int l_hi = std::min(8, L);
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ReferencePtr round = round_reference(grid);

  Check holder{"holder", 1e-10, true};
  Check jensen{"jensen_entropy", 1e-12};
  Check am_lower{"am_estimate_lower", 1e-10};
  Check am_upper{"am_estimate_upper", 1e-10};
  Check sandwich{"ding_mabuchi_sandwich", 1e-9};
  Check monotone{"ding_monotonicity", 1e-9};
  Check step{"step_inequality", 1e-9};

  int code = kOk;
  try {
    for (int t = 0; t < cfg.trials; ++t) {
      // Every other trial uses a random non-round reference form.
      ReferencePtr base = round;
      if (t % 2 == 1) base = make_reference(ConformalMetric(random_field(rng, grid, 1, 6, 0.5), kFourPi));
      const ConformalMetric& m = base->metric;
      const Field& f = base->ricci_potential;

      const Field g = random_field(rng, grid, 0, l_hi, unit(rng));
      const Field h = random_field(rng, grid, 0, l_hi, unit(rng));
      const double tau = 1.0 - unit(rng);
      const double log_lhs = log_mean_exp(f - g, m) / tau + (1.0 - 1.0 / tau) * log_mean_exp(f - h, m);
      const double log_rhs = log_mean_exp(f - (1.0 / tau) * g - (1.0 - 1.0 / tau) * h, m);
      holder.add(-std::expm1(log_lhs - log_rhs));

      const KahlerPotential u = random_potential(rng, base, l_hi, 1.0, 0.05);
      const KahlerPotential v = random_potential(rng, base, l_hi, 1.0, 0.05);
      jensen.add(entropy(u));
      double D = ding(u);
      if (cfg.iteration.fault_flip_ding_sign) D = -D;
      sandwich.add(mabuchi(u) - base->f_mean - D);

      const double diff = am(u) - am(v);
      const Field uv = u.psi - v.psi;
      am_lower.add(diff - integrate(uv * density(u), m) / m.V());
      am_upper.add(integrate(uv * density(v), m) / m.V() - diff);
    }

    for (double tau : {0.5, 1.0}) {
      IterationConfig it = cfg.iteration;
      it.tau = tau;
      it.max_steps = 8;
      it.formulation = Formulation::conformal;
      InitialData bumpy{"bumpy", 0.3, cfg.seed, {}};
      try {
        const Trajectory tr = run(ConformalMetric(initial_field(bumpy, grid), kFourPi), it);
        for (std::size_t k = 1; k < tr.states.size(); ++k) {
          monotone.add(tr.states[k - 1].energies.Ding - tr.states[k].energies.Ding);
          step.add(verify_step_inequality(tr.states[k - 1], tr.states[k]).slack);
        }
      } catch (const MonotonicityViolation& e) {
        monotone.add(-e.increase());
        monotone.note = e.what();
      }
    }
  } catch (const Error& e) {
    log << "solver failure: " << e.what() << "\n";
    code = kSolverFailure;
  }

  json checks = json::array();
  bool all = true;
  for (const Check* c : {&holder, &jensen, &am_lower, &am_upper, &sandwich, &monotone, &step}) {
    checks.push_back(c->to_json());
    all = all && c->passed();
    log << (c->passed() ? "PASS " : "FAIL ") << c->name << ": " << c->trials
        << " trials, worst slack " << (c->trials ? fmt17(c->worst) : "n/a") << "\n";
  }
  if (code == kOk && !all) code = kCheckFailure;

  json report;
  report["seed"] = cfg.seed;
  report["L_max"] = L;
  report["trials"] = cfg.trials;
  report["fault_flip_ding_sign"] = cfg.iteration.fault_flip_ding_sign;
  report["checks"] = checks;
  report["passed"] = code == kOk;
  outputs.write(root / "verify_report.json", report.dump(2) + "\n");

  json manifest;
  manifest["format"] = "ricci-run-manifest 1";
  manifest["command"] = "verify";
  manifest["config"] = config_json(cfg);
  manifest["inputs"] = inputs_json(cfg);
  manifest["grid"] = grid_json(*grid);
  manifest["seed"] = cfg.seed;
  manifest["outputs"] = outputs.to_json();
  manifest["exit_code"] = code;
  manifest["timestamp"] = utc_timestamp();
  std::ofstream(root / "manifest.json") << manifest.dump(2) << "\n";
  return code;
}

// ---------------------------------------------------------------------------

int cmd_snapshot(const std::string& path, std::ostream& out, std::ostream& err) {
  Snapshot s;
  try {
    s = read_snapshot(path);
  } catch (const SnapshotFormatError& e) {
    err << "malformed snapshot: " << e.what() << "\n";
    return kConfigError;
  }
  if (s.L_max < 4) {
    err << "malformed snapshot: L_max must be at least 4\n";
    return kConfigError;
  }
  if (!s.has_field("u") && !s.has_field("psi")) {
    err << "malformed snapshot: neither 'u' nor 'psi' is present\n";
    return kConfigError;
  }

  out << "snapshot " << path << "\n";
  out << "L_max " << s.L_max << "\n";
  out << "V " << fmt17(s.V) << "\n";
  for (const auto& [k, v] : s.metadata) out << k << " " << v << "\n";
  out << "fields";
  for (const auto& f : s.fields) out << " " << f.first;
  out << "\n";

  try {
    const GridPtr grid = make_grid(s.L_max, GridSizing::dealiased);
    const ReferencePtr ref = round_reference(grid);
    const double scale = s.V / kFourPi;
    ConformalMetric metric;
    KahlerPotential psi;
    if (s.has_field("u")) {
      const ConformalMetric raw = ConformalMetric::unnormalized(Field::from_coeffs(grid, s.field("u")), s.V);
      out << "area_defect " << fmt17(area(raw) / s.V - 1.0) << "\n";
      out << "gauss_bonnet_defect " << fmt17(gauss_bonnet_defect(raw)) << "\n";
      metric = ConformalMetric(raw.u(), kFourPi);
    }
    if (s.has_field("psi")) {
      psi = {(1.0 / scale) * Field::from_coeffs(grid, s.field("psi")), ref};
      if (!s.has_field("u")) {
        metric = u_from_psi(psi);
        out << "gauss_bonnet_defect " << fmt17(gauss_bonnet_defect(metric)) << "\n";
      } else {
        out << "form_mismatch " << fmt17(sup_norm(metric.factor() - density(psi))) << "\n";
      }
    } else {
      psi = psi_from_u(metric, ref);
    }
    out << "AM " << fmt17(am(psi)) << "\n";
    out << "Ding " << fmt17(ding(psi)) << "\n";
    out << "Mabuchi " << fmt17(mabuchi(psi)) << "\n";
    out << "entropy " << fmt17(entropy(psi)) << "\n";
    out << "f_mean " << fmt17(ref->f_mean) << "\n";
    out << "curvature_dev " << fmt17(sup_norm(scalar_curvature(metric) - 2.0) / scale) << "\n";
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kOk;
}

}  // namespace ricci::cli
