#pragma once

#include <stdexcept>
#include <string>

namespace prcut {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, violated preconditions, inconsistent shapes.
/// The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation left its numerically meaningful regime (non-finite values,
/// cluster collapse). The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Raised when a tracked cluster mass falls under the collapse floor.
class CollapseError : public NumericalError {
 public:
  CollapseError(std::size_t cluster, double mass)
      : NumericalError("cluster " + std::to_string(cluster) +
                       " collapsed: mass " + std::to_string(mass) +
                       " below floor"),
        cluster_(cluster),
        mass_(mass) {}

  std::size_t cluster() const noexcept { return cluster_; }
  double mass() const noexcept { return mass_; }

 private:
  std::size_t cluster_;
  double mass_;
};

}  // namespace prcut
