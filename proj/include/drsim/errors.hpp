#pragma once

#include <stdexcept>
#include <string>

namespace drsim {

// Malformed or semantically invalid configuration input.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Demand at some slot exceeds the generation/demand cap; the simulator
// reports this instead of modeling curtailment.
class CurtailmentRequired : public std::runtime_error {
 public:
  CurtailmentRequired(int slot, double demand_kw, double cap_kw, const std::string& context = {})
      : std::runtime_error(context + (context.empty() ? "" : ": ") + "curtailment required at slot " +
                           std::to_string(slot) + ": demand " + std::to_string(demand_kw) +
                           " kW exceeds cap " + std::to_string(cap_kw) + " kW"),
        slot(slot),
        demand_kw(demand_kw),
        cap_kw(cap_kw) {}
  int slot;
  double demand_kw;
  double cap_kw;
};

// The box/equality constraints of a household problem admit no solution.
class InfeasibleDemand : public std::runtime_error {
 public:
  explicit InfeasibleDemand(const std::string& what) : std::runtime_error(what) {}
};

// A vehicle cannot reach full charge within its home window.
class InfeasibleWindow : public std::runtime_error {
 public:
  explicit InfeasibleWindow(const std::string& what) : std::runtime_error(what) {}
};

class DistanceExceedsRange : public std::runtime_error {
 public:
  DistanceExceedsRange(double distance, double range)
      : std::runtime_error("distance " + std::to_string(distance) + " mi exceeds vehicle range " +
                           std::to_string(range) + " mi") {}
};

// Behavior sampling failed to produce a feasible draw within the retry budget,
// which indicates misconfigured distributions.
class RejectionBudgetExceeded : public std::runtime_error {
 public:
  explicit RejectionBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace drsim
