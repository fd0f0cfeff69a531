#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coulomb {

// Malformed arguments: shape mismatches, empty sets, invalid parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A data source could not supply the requested samples.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base for numeric blow-ups (non-finite coordinates, losses, parameters).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationDiverged : public DivergenceError {
 public:
  SimulationDiverged(std::size_t sample_index, long step)
      : DivergenceError("simulation diverged: generated sample " + std::to_string(sample_index) +
                        " is non-finite after step " + std::to_string(step)),
        sample_index_(sample_index), step_(step) {}

  std::size_t sample_index() const noexcept { return sample_index_; }
  long step() const noexcept { return step_; }

 private:
  std::size_t sample_index_;
  long step_;
};

}  // namespace coulomb
