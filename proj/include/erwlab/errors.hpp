#pragma once

#include <stdexcept>

namespace erwlab {

// Bad or inconsistent configuration; CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A structural condition on the walk fails (drift, ellipticity, bounded
// jumps); CLI exit code 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Referenced input file absent; CLI exit code 3.
struct MissingInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An estimator was asked to run on too little data to say anything.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace erwlab
