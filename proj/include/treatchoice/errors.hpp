#pragma once

#include <stdexcept>
#include <string>

namespace treatchoice {

// Bad run configuration (flags, budgets, rule setup). CLI exit code 2.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or unusable input data. CLI exit code 3.
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace treatchoice
