#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

#include "geoflow/types.hpp"

namespace geoflow {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidDimensionError : Error {
  using Error::Error;
};

struct RetractionUndefinedError : Error {
  using Error::Error;
};

struct ParameterError : Error {
  using Error::Error;
};

struct PositivityError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct ReparametrizationError : Error {
  using Error::Error;
};

struct DegenerateSplitError : Error {
  using Error::Error;
};

struct NotALoopError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// Raised when an integrator meets a non-finite value; carries the offending point.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, Vec point)
      : Error(describe(what, point)), point_(std::move(point)) {}

  const Vec& point() const { return point_; }

 private:
  static std::string describe(const std::string& what, const Vec& point) {
    std::ostringstream os;
    os << what << " at point (";
    for (Eigen::Index i = 0; i < point.size(); ++i) {
      if (i > 0) os << ", ";
      os << point(i);
    }
    os << ")";
    return os.str();
  }

  Vec point_;
};

}  // namespace geoflow
