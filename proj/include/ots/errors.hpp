#pragma once

#include <stdexcept>
#include <string>

namespace ots {

// Base class for every error raised by the library. The CLI maps
// ValidationFailure subclasses to exit code 2 and SolverFailure to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationFailure : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

// --- input / schema -------------------------------------------------------

class SchemaError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class ValidationError : public ValidationFailure {
 public:
  ValidationError(std::string path, const std::string& what)
      : ValidationFailure(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class UnitsError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NameCollisionError : public Error {
 public:
  using Error::Error;
};

// --- uncertainty ----------------------------------------------------------

class EmptyBoxError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class UnsupportedSupportError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class DimensionTooLargeError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class NotFullDimensionalError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class MissingMomentsError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class PSDError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class ScenarioOutsideSupportError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

// --- solver ---------------------------------------------------------------

class NumericalError : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

class EnumerationTooLargeError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

}  // namespace ots
