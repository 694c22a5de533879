#pragma once

#include <stdexcept>
#include <string>

namespace pterisk {

// Exit-code contract: config 2, data 3, backend 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct BackendError : std::runtime_error {
  BackendError(const std::string& what, int attempts_made, bool can_retry)
      : std::runtime_error(what), attempts(attempts_made), retryable(can_retry) {}
  int attempts = 0;
  bool retryable = false;
};

}  // namespace pterisk
