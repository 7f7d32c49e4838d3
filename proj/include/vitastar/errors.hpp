#pragma once

#include <stdexcept>

namespace vitastar {

/// Shape or rank mismatch between operands.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Soft node selection was asked to choose from an empty open set.
class EmptyOpenListError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument fell outside its documented range.
class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Randomized generation gave up after its bounded retry budget.
class GenerationExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input exceeded a fixed model capacity (e.g. the positional table).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vitastar
