#pragma once

#include <stdexcept>
#include <string>

namespace freightbench {

// Input schema problems: unknown columns, out-of-vocabulary values, bad headers.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid arguments or hyperparameters caught before any work starts.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad training/evaluation data: non-finite values, negative weights, empty sets.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimization blew up (non-finite loss/scores); message carries the iteration.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Matrix dimensions do not match the model contract.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation applied to a model family that does not support it.
class ModelTypeError : public std::runtime_error {
 public:
  explicit ModelTypeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace freightbench
