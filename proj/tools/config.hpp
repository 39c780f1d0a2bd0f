#pragma once

// Flat "key = value" run configuration. Blank lines and lines starting with
// '#' are ignored; unknown keys are errors.

#include "ricci/iteration.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ricci::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class SnapshotPolicy { none, final, all };

struct RunConfig {
  int L_max = 32;
  /// Ricci-curvature constant of the class; V = 2/c.
  double c = 0.15915494309189535;  // 1/(2π)
  std::vector<double> taus{1.0};
  InitialData initial;
  std::string initial_snapshot;  // set when initial = snapshot(path)
  IterationConfig iteration;
  std::string out_dir = "ricci_out";
  SnapshotPolicy snapshots = SnapshotPolicy::final;

  bool check_monotonicity = true;
  bool check_step_inequality = true;
  bool check_sandwich = true;

  std::uint64_t seed = 1;
  int trials = 1000;
  int verify_L_max = 16;
  int jobs = 1;

  /// Keys as written in the file, for the manifest.
  std::map<std::string, std::string> raw;
  std::string source_path;
  std::string source_text;
};

/// Parses the text of a configuration file. `base_dir` resolves relative
/// snapshot paths. Throws ConfigError with the offending line.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Parses an initial-data expression such as "bumpy(eps=0.4, seed=7)".
void parse_initial(const std::string& expr, RunConfig& cfg, const std::string& base_dir = ".");

std::string formulation_name(Formulation f);

}  // namespace ricci::cli
