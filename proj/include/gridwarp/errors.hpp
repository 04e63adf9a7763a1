#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gridwarp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's mathematical domain.
struct DomainError : Error {
  using Error::Error;
};

/// Invalid or incomplete input description (elements, config, sizes).
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// A channel lacks the absolute targets that pin its solution.
struct UnderDeterminedError : Error {
  using Error::Error;
};

/// The iterative solver hit its iteration cap. Carries the best iterate seen.
struct NonConvergenceError : Error {
  NonConvergenceError(const std::string& what, Eigen::VectorXd best, double residual, int iterations)
      : Error(what), best_iterate(std::move(best)), relative_residual(residual), iterations(iterations) {}

  Eigen::VectorXd best_iterate;
  double relative_residual;
  int iterations;
};

}  // namespace gridwarp
