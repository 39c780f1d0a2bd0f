#pragma once

#include "config.hpp"

#include <iosfwd>
#include <string>

namespace ricci::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kSolverFailure = 3,
  kCheckFailure = 4,
};

/// SHA-1 of "blob <size>\0<content>", as git computes it, in hex.
std::string git_blob_sha1(const std::string& content);

int cmd_run(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_snapshot(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace ricci::cli
