#pragma once

#include <stdexcept>
#include <string>

namespace ladderlab {

// Error taxonomy shared by the library and the CLI exit-code mapping:
//   domain_error / parameter_error -> 2
//   precision_error                -> 3
//   io_error / validation_error    -> 4
class domain_error : public std::domain_error {
 public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

class parameter_error : public std::invalid_argument {
 public:
  explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

// Requested tolerance cannot be met within the evaluation budget.
class precision_error : public std::runtime_error {
 public:
  explicit precision_error(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Persisted data violates a structural invariant (e.g. a corrupt checkpoint file).
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ladderlab
