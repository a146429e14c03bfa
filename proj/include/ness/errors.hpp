#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace ness {

/// Argument outside the domain where an operation is defined (energy off the
/// open band, pole on an interval endpoint, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature or root search did not reach the requested tolerance. Carries
/// the best estimate obtained so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::complex<double> best, double error)
      : std::runtime_error(what), best_estimate_(best), error_estimate_(error) {}

  std::complex<double> best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  std::complex<double> best_estimate_;
  double error_estimate_;
};

/// v + v r0(z) v is numerically singular on the range of v: z sits at (or very
/// close to) an eigenvalue of the coupled Hamiltonian.
class BoundStateProximity : public std::runtime_error {
 public:
  BoundStateProximity(const std::string& what, double rcond, std::complex<double> det)
      : std::runtime_error(what), rcond_(rcond), det_(det) {}

  double rcond() const noexcept { return rcond_; }
  std::complex<double> determinant() const noexcept { return det_; }

 private:
  double rcond_;
  std::complex<double> det_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ness
