#include "drsim/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "drsim/errors.hpp"

namespace drsim {

namespace {

constexpr int kRejectionBudget = 1000;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t trial, std::uint64_t vehicle,
                     Purpose purpose) {
  // Nested mixing keeps the key fields order-sensitive (no XOR symmetry).
  std::uint64_t h = mix64(seed);
  for (std::uint64_t field : {trial, vehicle, static_cast<std::uint64_t>(purpose)})
    h = mix64(h ^ mix64(field));
  for (auto& w : s_) w = splitmix64(h);
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller on u1 in (0, 1] so the log never sees zero.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double RngStream::truncated_normal(double mean, double stddev, double lo, double hi) {
  if (stddev == 0) {
    const double v = std::clamp(mean, lo, hi);
    return v;
  }
  for (int i = 0; i < kRejectionBudget; ++i) {
    const double v = mean + stddev * normal();
    if (v >= lo && v <= hi) return v;
  }
  throw RejectionBudgetExceeded("truncated normal: no draw landed in [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "] after " +
                                std::to_string(kRejectionBudget) + " tries");
}

double RngStream::truncated_lognormal(double median, double sigma, double lo, double hi) {
  if (sigma == 0) return std::clamp(median, lo, hi);
  for (int i = 0; i < kRejectionBudget; ++i) {
    const double v = median * std::exp(sigma * normal());
    if (v >= lo && v <= hi) return v;
  }
  throw RejectionBudgetExceeded("truncated lognormal: no draw landed in [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "] after " +
                                std::to_string(kRejectionBudget) + " tries");
}

std::size_t RngStream::categorical(const std::vector<double>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  const double u = uniform() * total;
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

double sample(const DistSpec& d, RngStream& rng) {
  switch (d.family) {
    case DistSpec::Family::Point:
      return d.value;
    case DistSpec::Family::Uniform:
      return d.lo + rng.uniform() * (d.hi - d.lo);
    case DistSpec::Family::Normal:
      return rng.truncated_normal(d.mean, d.stddev, d.lo, d.hi);
    case DistSpec::Family::LogNormal:
      return rng.truncated_lognormal(d.median, d.sigma, d.lo, d.hi);
    case DistSpec::Family::Histogram: {
      std::vector<double> w(d.bins.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = d.bins[i].second;
      return d.bins[rng.categorical(w)].first;
    }
  }
  return d.value;
}

std::size_t sample_type(const std::vector<BevSpec>& fleet, RngStream& rng) {
  std::vector<double> shares(fleet.size());
  for (std::size_t i = 0; i < fleet.size(); ++i) shares[i] = fleet[i].market_share;
  return rng.categorical(shares);
}

BehaviorSample sample_behavior(const BehaviorDistributions& dists, RngStream& arrival_rng,
                               RngStream& departure_rng, RngStream& distance_rng) {
  BehaviorSample b;
  b.arrival_slot = static_cast<int>(std::floor(sample(dists.arrival, arrival_rng)));
  b.departure_slot = static_cast<int>(std::floor(sample(dists.departure, departure_rng)));
  b.distance = sample(dists.distance, distance_rng);
  return b;
}

std::vector<int> home_window(int arrival_slot, int departure_slot, int slot_count) {
  const int len = ((departure_slot - arrival_slot) % slot_count + slot_count) % slot_count;
  std::vector<int> w(len);
  for (int i = 0; i < len; ++i) w[i] = (arrival_slot + i) % slot_count;
  return w;
}

BevAgent build_agent(int vehicle, const Scenario& s, std::uint64_t trial) {
  const auto uv = static_cast<std::uint64_t>(vehicle);
  RngStream type_rng(s.seed, trial, uv, Purpose::VehicleType);
  RngStream arrival_rng(s.seed, trial, uv, Purpose::Arrival);
  RngStream departure_rng(s.seed, trial, uv, Purpose::Departure);
  RngStream distance_rng(s.seed, trial, uv, Purpose::Distance);

  BevAgent a;
  a.index = vehicle;
  a.spec = s.fleet[sample_type(s.fleet, type_rng)];

  for (int tries = 0; tries < kRejectionBudget; ++tries) {
    const BehaviorSample b = sample_behavior(s.behavior, arrival_rng, departure_rng, distance_rng);
    if (b.distance > a.spec.range_miles) continue;
    auto window = home_window(b.arrival_slot, b.departure_slot, s.grid.slot_count);
    if (window.empty()) continue;
    const int t_req =
        required_hours(a.spec.battery_kwh, a.spec.rated_kw, a.spec.range_miles, b.distance);
    if (t_req > static_cast<int>(window.size())) continue;

    a.arrival_slot = b.arrival_slot;
    a.departure_slot = b.departure_slot;
    a.distance = b.distance;
    a.soc_arrival = arrival_soc(a.spec.battery_kwh, a.spec.range_miles, b.distance);
    a.t_req = t_req;
    const int w_len = static_cast<int>(window.size());
    a.t_max = std::clamp(s.t_max_active.value_or(w_len), t_req, w_len);
    a.window = std::move(window);
    return a;
  }
  throw RejectionBudgetExceeded("vehicle " + std::to_string(vehicle) + " in trial " +
                                std::to_string(trial) +
                                ": no feasible behavior draw after 1000 tries");
}

}  // namespace drsim
