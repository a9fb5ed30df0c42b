#pragma once

#include <stdexcept>
#include <string>

namespace difint {

// Invalid user-supplied value; the message starts with the field name.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested problem size exceeds a configured capacity (e.g. particle number).
class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data cannot support the requested computation (rank-deficient,
// collinear, all-identical, ...).
class degenerate_data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine failed (singular matrix, no convergence where one is
// required, ...).
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace difint
