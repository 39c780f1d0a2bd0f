#pragma once

// Text snapshots of spectral fields:
//
//   ricci-snapshot 1
//   L_max <int>
//   V <real>
//   [<key> <value>]...          free-form metadata, one token value
//   field <role> <count>
//   <l> <m> <coefficient>        count lines, %.17g
//   end
//   ...
//
// Roles used by the engine: "u" (log-factor against the round metric of
// area V) and "psi" (potential over the round reference).

#include "ricci/errors.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ricci {

class SnapshotFormatError : public Error {
 public:
  SnapshotFormatError(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Snapshot {
  int L_max = 0;
  double V = 0.0;
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Eigen::VectorXd>> fields;

  /// Coefficients of the first field with this role; throws if absent.
  const Eigen::VectorXd& field(const std::string& role) const;
  bool has_field(const std::string& role) const;
};

void write_snapshot(std::ostream& os, const Snapshot& s);
void write_snapshot(const std::string& path, const Snapshot& s);

/// Throws SnapshotFormatError carrying the 1-based line of the first defect.
Snapshot read_snapshot(std::istream& is);
Snapshot read_snapshot(const std::string& path);

}  // namespace ricci
