#pragma once

#include <stdexcept>
#include <string>

namespace alignlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

/// A denominator (rho_phi, a partition-piece mass, ...) fell below the vacuum threshold.
class DivisionHazard : public Error {
 public:
  using Error::Error;
};

/// A time step violated a stability bound; carries the largest admissible step.
class StepRejected : public Error {
 public:
  StepRejected(const std::string& what, double admissible_dt)
      : Error(what), admissible_dt_(admissible_dt) {}
  double admissible_dt() const noexcept { return admissible_dt_; }

 private:
  double admissible_dt_;
};

class IterationLimit : public Error {
 public:
  IterationLimit(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class MassMismatch : public Error {
 public:
  MassMismatch(const std::string& what, double mass_a, double mass_b)
      : Error(what), mass_a_(mass_a), mass_b_(mass_b) {}
  double mass_a() const noexcept { return mass_a_; }
  double mass_b() const noexcept { return mass_b_; }

 private:
  double mass_a_;
  double mass_b_;
};

class SizeLimit : public Error {
 public:
  SizeLimit(const std::string& what, std::size_t limit) : Error(what), limit_(limit) {}
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t limit_;
};

class VacuumError : public Error {
 public:
  using Error::Error;
};

class BlowUpError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An experiment's named precondition does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace alignlab
