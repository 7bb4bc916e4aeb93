#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cemfrac {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// Symmetric tensor in Voigt order (11, 22, 33, 12, 23, 13).
using Voigt6 = Eigen::Matrix<double, 6, 1>;

using NodeId = std::uint32_t;
using ElementId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TopologyError : public Error {
public:
  using Error::Error;
};

class DegenerateElementError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Raised when the time integration produces non-finite values.
class NumericalAbort : public Error {
public:
  using Error::Error;
};

}  // namespace cemfrac
