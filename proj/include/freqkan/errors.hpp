#pragma once

#include <stdexcept>
#include <string>

namespace freqkan {

// All engine errors derive from Error so the CLI can map them to exit codes:
// usage/config/data problems exit 1, numerical failures exit 2.
class Error : public std::runtime_error {
 public:
  Error(std::string msg, int exit_code)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::string msg) : Error(std::move(msg), 1) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(std::string msg) : Error(std::move(msg), 1) {}
};

class DataError : public Error {
 public:
  explicit DataError(std::string msg) : Error(std::move(msg), 1) {}
};

// Non-finite values, failed gradient checks, and similar numeric trouble.
class NumericError : public Error {
 public:
  explicit NumericError(std::string msg) : Error(std::move(msg), 2) {}
};

}  // namespace freqkan
