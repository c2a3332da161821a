#pragma once

#include <stdexcept>
#include <string>

namespace bmcal {

// Malformed input files (forecast JSONL, trace JSONL, config).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iteration caps exceeded, non-finite intermediates, stick-count blowup.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad ExperimentConfig or CLI arguments.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bmcal
