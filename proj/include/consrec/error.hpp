#pragma once

#include <stdexcept>
#include <string>

namespace consrec {

// Bad configuration or command-line usage.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, missing or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatches and other misuse of the matrix engine.
class ShapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// NaN/Inf produced during a computation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace consrec
