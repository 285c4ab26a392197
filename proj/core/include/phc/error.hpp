// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace phc
{

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid unit-cell geometry (e.g. a disc touching the cell boundary).
class GeometryError : public Error
{
public:
  using Error::Error;
};

/// Mesh boundary does not admit a periodic identification.
class TopologyError : public Error
{
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Dimension or index mismatch in linear-algebra objects.
class DimensionError : public Error
{
public:
  using Error::Error;
};

/// Pole of a permittivity law, or a numerically singular matrix.
class SingularityError : public Error
{
public:
  using Error::Error;
};

/// Permittivity outside the admissible magnitude bounds at a frequency.
class BoundsError : public Error
{
public:
  using Error::Error;
};

/// Unrecoverable failure inside an eigenvalue search.
class SolverError : public Error
{
public:
  using Error::Error;
};

/// Invalid or incomplete run configuration. The message names the key.
class ConfigError : public Error
{
public:
  ConfigError(const std::string &key, const std::string &what)
    : Error("config key '" + key + "': " + what), key_(key)
  {
  }

  const std::string &key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace phc
