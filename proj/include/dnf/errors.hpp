#pragma once

#include <stdexcept>
#include <string>

namespace dnf {

/// A parameter set or config document violates an invariant.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Config text could not be parsed, or a key is missing/unknown.
class ConfigError : public ValidationError {
public:
  ConfigError(const std::string& key, const std::string& what)
      : ValidationError(key.empty() ? what : key + ": " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Numerical failure (NaN/Inf) while integrating a block.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(long step, const std::string& detail)
      : std::runtime_error("step " + std::to_string(step) + ": " + detail), step_(step), detail_(detail) {}

  long step() const noexcept { return step_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  long step_;
  std::string detail_;
};

}  // namespace dnf
