#pragma once

#include <stdexcept>
#include <string>

namespace ricci {

/// Base class for every failure raised by the numerical engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The compatibility integral of a Poisson right-hand side is not zero.
class SolvabilityViolation : public Error {
 public:
  SolvabilityViolation(const std::string& what, double defect)
      : Error(what), defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

/// An inner linear iteration did not reach its residual target.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A density 1 + ½Δψ (or a conformal factor) left the positive cone.
class PositivityViolation : public Error {
 public:
  PositivityViolation(const std::string& what, double min_density)
      : Error(what), min_density_(min_density) {}
  double min_density() const { return min_density_; }

 private:
  double min_density_;
};

class NewtonDivergence : public Error {
 public:
  NewtonDivergence(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class BalanceDivergence : public Error {
 public:
  BalanceDivergence(const std::string& what, double center_norm)
      : Error(what), center_norm_(center_norm) {}
  double center_norm() const { return center_norm_; }

 private:
  double center_norm_;
};

/// The Ding energy increased along an iteration (a solver bug; the energy is
/// provably non-increasing).
class MonotonicityViolation : public Error {
 public:
  MonotonicityViolation(const std::string& what, int step, double increase)
      : Error(what), step_(step), increase_(increase) {}
  int step() const { return step_; }
  double increase() const { return increase_; }

 private:
  int step_;
  double increase_;
};

}  // namespace ricci
