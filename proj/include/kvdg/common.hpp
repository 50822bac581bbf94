#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace kvdg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using Dense = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Base class of every error raised by the library. `module()` names the
/// component that raised it so CLI messages can be module-qualified.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

/// Invalid user input: parameters, configuration files, presets.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the offending 1-based line number.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& module, int line, const std::string& what)
      : ConfigError(module, "line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Mesh connectivity or geometry violates the mesh invariants.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Singular systems, failed factorizations, degenerate elements.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A point could not be located in the requested element.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace kvdg
