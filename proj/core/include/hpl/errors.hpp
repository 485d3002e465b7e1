#pragma once

#include <stdexcept>
#include <string>

namespace hpl {

/// Invalid or inconsistent configuration (rejected before any numerics run).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical conditioning failure (rank deficiency, ill-conditioned solve).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// File or stream level failure (missing file, malformed header, short read).
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hpl
