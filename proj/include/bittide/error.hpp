#pragma once

#include <stdexcept>
#include <string>

namespace bittide {

/// Invalid parameters or malformed configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query outside the domain of the queried object (e.g. a phase lookup
/// before the start of a history, or an unknown link).
class QueryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Actuator pulse issued before the minimum pulse interval elapsed.
class PulseTooSoon : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decomposition of a round trip latency produced a negative remainder.
class ModelInconsistency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FaultKind { overflow, underflow, accounting, divergence };

std::string to_string(FaultKind kind);

/// Raised when a run must abort. Carries the simulated time of the fault.
class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(FaultKind kind, double time_s, const std::string& what)
      : std::runtime_error(what), kind_(kind), time_s_(time_s) {}

  FaultKind kind() const noexcept { return kind_; }
  double time() const noexcept { return time_s_; }

 private:
  FaultKind kind_;
  double time_s_;
};

}  // namespace bittide
