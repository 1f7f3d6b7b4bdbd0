#pragma once

#include <stdexcept>
#include <string>

namespace coic {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs)
      : Error("dimension mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}
};

class ZeroNormVector : public Error {
 public:
  ZeroNormVector() : Error("cosine distance is undefined for a zero-norm vector") {}
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Scenario configuration problems; the message starts with the offending field path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class DuplicateRequestId : public Error {
 public:
  explicit DuplicateRequestId(unsigned long long id)
      : Error("duplicate request id " + std::to_string(id)) {}
};

// A broken tier-level guarantee (lost response, clock regression, ...). Always fatal.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace coic
