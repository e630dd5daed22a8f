#pragma once

#include <stdexcept>
#include <string>

namespace causalbandit {

// Argument outside the mathematical domain of an operation (x not in the
// candidate set, log^k(n) <= 1, empty graph, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed structural parameter (odd collider line, non-bijective
// permutation, T smaller than the arm count, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The request is well-formed but exceeds the size an exact routine supports.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Randomized construction exhausted its retry budget.
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(const std::string& failing_assumption, const std::string& what)
      : std::runtime_error(what), failing_assumption_(failing_assumption) {}
  const std::string& failing_assumption() const noexcept { return failing_assumption_; }

 private:
  std::string failing_assumption_;
};

// Operation invoked on an object that is not in the required state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace causalbandit
