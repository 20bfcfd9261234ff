#pragma once

#include <stdexcept>
#include <string>

namespace hopf {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (edge lists, dataset directories).
class IngestError : public Error {
 public:
  using Error::Error;
};

// Precondition on a call argument violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Matrix dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericsError : public Error {
 public:
  using Error::Error;
};

// Inconsistent model / training / run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An object was used after the state it depends on changed.
class StateError : public Error {
 public:
  using Error::Error;
};

// Training diverged. Carries where it happened.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch, int batch, int iteration = 0)
      : Error(what), epoch_(epoch), batch_(batch), iteration_(iteration) {}

  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }
  // HOPF iteration (1-based), 0 when raised outside the iterative loop.
  int iteration() const noexcept { return iteration_; }

 private:
  int epoch_;
  int batch_;
  int iteration_;
};

}  // namespace hopf
