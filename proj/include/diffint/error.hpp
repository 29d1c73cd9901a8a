#pragma once

#include <stdexcept>
#include <string>

namespace diffint {

/// A caller supplied a value outside an operation's domain (zero detuning,
/// non-positive atom count, vanishing coupling, ...).
class InvalidParameter : public std::invalid_argument {
public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// The entangled-ensemble tilt makes one of the two estimators singular.
class DegenerateTilt : public std::invalid_argument {
public:
  explicit DegenerateTilt(const std::string& what) : std::invalid_argument(what) {}
};

/// The detuning search did not find an interior minimum.
class OptimizationFailed : public std::runtime_error {
public:
  explicit OptimizationFailed(const std::string& what) : std::runtime_error(what) {}
};

/// Bad configuration file or inconsistent run options.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace diffint
