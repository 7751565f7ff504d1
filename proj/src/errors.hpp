#pragma once

#include <stdexcept>
#include <string>

namespace bdlie {

// Adaptive integration could not proceed (step underflow or step budget).
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double where() const noexcept { return t_; }

private:
  double t_;
};

// An exponent left the representable range; carries the time of the trip.
class OverflowError : public std::runtime_error {
public:
  OverflowError(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double where() const noexcept { return t_; }

private:
  double t_;
};

// The velocity-map matrix became numerically singular mid-integration.
class SingularError : public std::runtime_error {
public:
  SingularError(const std::string& what, double last_valid_t, double cond)
      : std::runtime_error(what), t_(last_valid_t), cond_(cond) {}
  double last_valid_t() const noexcept { return t_; }
  double condition() const noexcept { return cond_; }

private:
  double t_;
  double cond_;
};

// State-space truncation failed to reach the requested accuracy.
class TruncationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tail mass too heavy for the requested computation.
class TailError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A commutator left the candidate span (or the cutoff was exceeded).
class NotClosedError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gauge values violate their structural invariants.
class GaugeInconsistencyError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace bdlie
