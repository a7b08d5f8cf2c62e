#pragma once

#include <stdexcept>
#include <string>

namespace qdrive {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument to a protocol factory, a scan driver or the CLI.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Gamma = omega = 0: adiabatic eigenvectors are undefined.
class GapClosedError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// Integrator could not make progress; carries the tau where it stalled.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double tau) : Error(what), tau_(tau) {}
  double tau() const noexcept { return tau_; }

 private:
  double tau_;
};

/// A minimum-duration search never reached its fidelity target.
class TargetUnreachedError : public Error {
 public:
  TargetUnreachedError(const std::string& what, double best_fidelity, double best_duration)
      : Error(what), best_fidelity_(best_fidelity), best_duration_(best_duration) {}
  double best_fidelity() const noexcept { return best_fidelity_; }
  double best_duration() const noexcept { return best_duration_; }

 private:
  double best_fidelity_;
  double best_duration_;
};

}  // namespace qdrive
