#pragma once

#include <stdexcept>
#include <string>

namespace wavesep {

// Failures reading or writing files and directories.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values, failed gradient checks, singular systems.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wavesep
