#pragma once

#include <stdexcept>
#include <string>

namespace gasnet {

// Argument outside a documented domain (e.g. ppm off the sensor curve).
struct OutOfRange : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Configuration rejected; message lists every violated invariant.
struct InvalidConfig : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Station stepped before boot().
struct NotBooted : std::logic_error {
  NotBooted() : std::logic_error("station not booted") {}
};

// Wire or config document could not be decoded.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem operation failed; surfaces as HTTP 503 at the service edge.
struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The simulation harness and the service disagree on the wire contract.
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gasnet
