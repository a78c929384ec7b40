#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hvqe {

using complex_t = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 62;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of incompatible size (qubit counts, vector lengths, registers).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside their documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure or violated internal consistency check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file. `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A value with its standard error. Energies are in units of the hopping t.
struct EnergyEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

}  // namespace hvqe
