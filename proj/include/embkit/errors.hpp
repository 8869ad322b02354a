#pragma once

#include <stdexcept>
#include <string>

namespace embkit {

// Base for every error the toolkit raises on purpose. The subclasses map onto
// the CLI exit codes: usage 1, data 2, numerical 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input: unreadable files, format violations, empty
// corpora, OOV query words.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses or gradients, degenerate statistics.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace embkit
