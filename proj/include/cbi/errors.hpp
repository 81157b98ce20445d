#pragma once

#include <stdexcept>
#include <string>

namespace cbi {

// Error taxonomy shared by all modules. Every throwing path uses one of these
// so callers (and the CLI) can render failures uniformly.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class InfiniteMass : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class InsufficientPaths : public Error {
 public:
  using Error::Error;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class OdeFailure : public Error {
 public:
  using Error::Error;
};

class MissingCertificate : public Error {
 public:
  using Error::Error;
};

class ConfigParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbi
