#pragma once

#include <cstdint>
#include <vector>

#include "drsim/bev.hpp"
#include "drsim/scenario.hpp"

namespace drsim {

// Stream purposes keep every sampled quantity on its own substream so that
// adding draws to one quantity never perturbs another.
enum class Purpose : std::uint64_t { VehicleType = 1, Arrival = 2, Departure = 3, Distance = 4 };

// Deterministic per-(seed, trial, vehicle, purpose) random stream:
// the key is hashed into xoshiro256++ state, so identical keys replay the
// identical sequence regardless of thread count or call order elsewhere.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t trial, std::uint64_t vehicle, Purpose purpose);

  std::uint64_t next_u64();
  double uniform();           // [0, 1)
  double normal();            // standard normal, Box-Muller with cached spare
  // Rejection-sampled truncations; throw RejectionBudgetExceeded after 1000
  // failed draws (a sign the configured bounds carry almost no mass).
  double truncated_normal(double mean, double stddev, double lo, double hi);
  double truncated_lognormal(double median, double sigma, double lo, double hi);
  // Index drawn proportionally to the (nonnegative) weights.
  std::size_t categorical(const std::vector<double>& weights);

 private:
  std::uint64_t s_[4];
  double spare_ = 0;
  bool has_spare_ = false;
};

// One draw from a configured distribution, truncated to its bounds.
double sample(const DistSpec& d, RngStream& rng);

std::size_t sample_type(const std::vector<BevSpec>& fleet, RngStream& rng);

struct BehaviorSample {
  int arrival_slot = 0;    // hour floored to a slot
  int departure_slot = 0;  // next-day departure, floored
  double distance = 0;     // miles
};

BehaviorSample sample_behavior(const BehaviorDistributions& dists, RngStream& arrival_rng,
                               RngStream& departure_rng, RngStream& distance_rng);

// Slots from arrival (inclusive) to departure (exclusive), wrapping midnight.
std::vector<int> home_window(int arrival_slot, int departure_slot, int slot_count);

struct BevAgent {
  int index = 0;
  BevSpec spec;
  int arrival_slot = 0;
  int departure_slot = 0;
  double distance = 0;
  double soc_arrival = 0;
  int t_req = 0;
  int t_max = 0;
  std::vector<int> window;
};

// Samples a vehicle and a behavior triple, redrawing (budget 1000) until the
// home window is nonempty, the distance fits the vehicle's range, and the
// required charging hours fit the window.
BevAgent build_agent(int vehicle, const Scenario& s, std::uint64_t trial);

}  // namespace drsim
