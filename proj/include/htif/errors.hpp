#pragma once

#include <stdexcept>
#include <string>

namespace htif {

// Not enough samples (or exceedances) for a statistic to mean anything.
// Kept distinct from a failed hypothesis so callers never confuse the two.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configurations the model deliberately excludes, e.g. a symmetric walk (p = 1/2).
class ModelExclusionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An internal invariant was breached; the simulation state can no longer be trusted.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad experiment configuration. `key()` names the offending JSON key path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace htif
