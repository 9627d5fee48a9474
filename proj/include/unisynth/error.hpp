#pragma once

#include <stdexcept>
#include <string>

namespace unisynth {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was called with arguments outside its contract.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A calibration procedure could not produce a valid correction.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// A scenario or sweep configuration failed validation. `key()` names the
// offending entry as a JSON pointer when one applies.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace unisynth
