#pragma once

#include <stdexcept>
#include <string>

namespace arsent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments. The CLI exits with status 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unreadable, malformed or unusable input data. The CLI exits with status 2.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace arsent
