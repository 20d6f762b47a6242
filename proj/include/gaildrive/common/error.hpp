#ifndef GAILDRIVE_COMMON_ERROR_HPP_
#define GAILDRIVE_COMMON_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gaildrive {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes, dimensions or settings that do not fit together.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An object was used in the wrong lifecycle state (e.g. backward before
// forward, stepping a finished episode).
class StateError : public Error {
 public:
  using Error::Error;
};

// Malformed checkpoint or dataset bytes.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The scripted expert committed an infraction while recording.
class CollectionError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf in a training loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaildrive

#endif  // GAILDRIVE_COMMON_ERROR_HPP_
