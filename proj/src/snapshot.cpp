#include "ricci/snapshot.hpp"

#include "ricci/spectral.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ricci {

const Eigen::VectorXd& Snapshot::field(const std::string& role) const {
  for (const auto& [r, c] : fields)
    if (r == role) return c;
  throw InvalidArgument("snapshot has no field '" + role + "'");
}

bool Snapshot::has_field(const std::string& role) const {
  for (const auto& f : fields)
    if (f.first == role) return true;
  return false;
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  // Next non-empty line split into tokens; false at end of input.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      tokens.clear();
      std::istringstream ss(line);
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return true;
    }
    ++line_no_;
    return false;
  }

  std::vector<std::string> expect(const char* what) {
    std::vector<std::string> t;
    if (!next(t)) fail(std::string("unexpected end of file, expected ") + what);
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SnapshotFormatError("snapshot line " + std::to_string(line_no_) + ": " + msg, line_no_);
  }

  long to_int(const std::string& s) const {
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (errno || end == s.c_str() || *end) fail("not an integer: '" + s + "'");
    return v;
  }

  double to_real(const std::string& s) const {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (errno == ERANGE && std::isinf(v)) fail("real out of range: '" + s + "'");
    if (end == s.c_str() || *end) fail("not a real number: '" + s + "'");
    return v;
  }

 private:
  std::istream& is_;
  int line_no_ = 0;
};

}  // namespace

void write_snapshot(std::ostream& os, const Snapshot& s) {
  os << "ricci-snapshot 1\n";
  os << "L_max " << s.L_max << "\n";
  os << "V " << fmt17(s.V) << "\n";
  for (const auto& [k, v] : s.metadata) os << k << " " << v << "\n";
  for (const auto& [role, c] : s.fields) {
    if (c.size() != num_coeffs(s.L_max)) throw InvalidArgument("write_snapshot: field '" + role + "' has wrong size");
    os << "field " << role << " " << c.size() << "\n";
    for (int l = 0; l <= s.L_max; ++l)
      for (int m = -l; m <= l; ++m) os << l << " " << m << " " << fmt17(c(lm_index(l, m))) << "\n";
    os << "end\n";
  }
}

void write_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_snapshot(os, s);
  if (!os) throw Error("failed writing '" + path + "'");
}

Snapshot read_snapshot(std::istream& is) {
  LineReader in(is);
  Snapshot s;
  auto t = in.expect("header");
  if (t.size() != 2 || t[0] != "ricci-snapshot" || t[1] != "1") in.fail("not a snapshot (bad magic line)");
  t = in.expect("L_max");
  if (t.size() != 2 || t[0] != "L_max") in.fail("expected 'L_max <int>'");
  s.L_max = static_cast<int>(in.to_int(t[1]));
  if (s.L_max < 0 || s.L_max > 4096) in.fail("L_max out of range");
  t = in.expect("V");
  if (t.size() != 2 || t[0] != "V") in.fail("expected 'V <real>'");
  s.V = in.to_real(t[1]);
  if (!(s.V > 0)) in.fail("V must be positive");

  const int n = num_coeffs(s.L_max);
  while (in.next(t)) {
    if (t[0] != "field") {
      if (t.size() != 2) in.fail("expected '<key> <value>' or 'field <role> <count>'");
      if (!s.fields.empty()) in.fail("metadata after the first field");
      s.metadata[t[0]] = t[1];
      continue;
    }
    if (t.size() != 3) in.fail("expected 'field <role> <count>'");
    if (in.to_int(t[2]) != n) in.fail("field count does not match L_max");
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    std::vector<bool> seen(n, false);
    for (int i = 0; i < n; ++i) {
      const auto row = in.expect("coefficient line");
      if (row.size() != 3) in.fail("expected '<l> <m> <coefficient>'");
      const long l = in.to_int(row[0]), m = in.to_int(row[1]);
      if (l < 0 || l > s.L_max || m < -l || m > l) in.fail("index (l, m) out of range");
      const int idx = lm_index(static_cast<int>(l), static_cast<int>(m));
      if (seen[idx]) in.fail("duplicate coefficient");
      seen[idx] = true;
      c(idx) = in.to_real(row[2]);
    }
    const auto end = in.expect("'end'");
    if (end.size() != 1 || end[0] != "end") in.fail("expected 'end'");
    s.fields.emplace_back(t[1], std::move(c));
  }
  if (s.fields.empty()) in.fail("snapshot contains no field");
  return s;
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SnapshotFormatError("cannot open snapshot '" + path + "'", 0);
  return read_snapshot(is);
}

}  // namespace ricci
