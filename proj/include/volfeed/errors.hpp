#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace volfeed {

// Error taxonomy mirrors the CLI exit codes: input problems exit 2,
// configuration problems exit 3, numerical failures exit 4.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void warn(const std::string& msg) {
  std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

}  // namespace volfeed
