#pragma once

#include <stdexcept>
#include <string>

namespace orbitnet {

/// Input that fails a documented invariant (scenario files, parameters, configs).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; the message names the line and column range.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No path connects the requested endpoints in the current snapshot.
class NoRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No satellite is above the horizon of a ground point.
class NoVisibleSatelliteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An event log that cannot have come from a complete run.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace orbitnet
