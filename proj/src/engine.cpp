#include "drsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "drsim/errors.hpp"
#include "drsim/kernels.hpp"
#include "drsim/pricing.hpp"

namespace drsim {

Mode mode_from_string(const std::string& name) {
  if (name == "baseline") return Mode::Baseline;
  if (name == "rtp-only") return Mode::RtpOnly;
  if (name == "rtp-v2g") return Mode::RtpV2g;
  throw ValidationError("unknown mode '" + name + "' (expected baseline, rtp-only or rtp-v2g)");
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Baseline: return "baseline";
    case Mode::RtpOnly: return "rtp-only";
    case Mode::RtpV2g: return "rtp-v2g";
  }
  return "?";
}

TrialEngine::TrialEngine(const Scenario& s, Mode mode, std::uint64_t trial)
    : s_(s), mode_(mode), trial_(trial) {
  const int slots = s.grid.slot_count;

  group_problem_.reserve(s.groups.size());
  for (const auto& g : s.groups) group_problem_.push_back(make_household(g));

  // Vehicles are held by the first bev_count users of the BEV-owning groups,
  // in declaration order; every mode of the same trial sees identical agents.
  user_group_.reserve(s.total_users());
  user_agent_.reserve(s.total_users());
  int next_vehicle = 0;
  for (std::size_t g = 0; g < s.groups.size(); ++g) {
    for (int i = 0; i < s.groups[g].count; ++i) {
      user_group_.push_back(static_cast<int>(g));
      const bool owns = s.groups[g].has_bev && next_vehicle < s.bev_count;
      user_agent_.push_back(owns ? next_vehicle++ : -1);
    }
  }
  agents_.reserve(next_vehicle);
  for (int v = 0; v < next_vehicle; ++v) agents_.push_back(build_agent(v, s, trial));

  std::vector<std::size_t> group_order(s.groups.size());
  if (s.update_order.empty()) {
    for (std::size_t g = 0; g < group_order.size(); ++g) group_order[g] = g;
  } else {
    for (std::size_t i = 0; i < s.update_order.size(); ++i) {
      const auto it = std::find_if(s.groups.begin(), s.groups.end(), [&](const UserGroup& g) {
        return g.name == s.update_order[i];
      });
      group_order[i] = static_cast<std::size_t>(it - s.groups.begin());
    }
  }
  std::vector<int> group_start(s.groups.size() + 1, 0);
  for (std::size_t g = 0; g < s.groups.size(); ++g)
    group_start[g + 1] = group_start[g] + s.groups[g].count;
  visit_order_.reserve(s.total_users());
  for (std::size_t g : group_order)
    for (int u = group_start[g]; u < group_start[g + 1]; ++u) visit_order_.push_back(u);

  // Round zero: nominal household loads, plug-in-on-arrival vehicle charging.
  state_.loads.reserve(user_group_.size());
  for (int u : user_group_) state_.loads.push_back(s.groups[u].nominal);
  state_.schedules.reserve(agents_.size());
  state_.aggregate.assign(slots, 0.0);
  scratch_prices_.assign(slots, 0.0);
  std::vector<double> no_prices(slots, 0.0);
  for (const auto& a : agents_) {
    const int g = owner_group(a.index);
    state_.schedules.push_back(uncontrolled_schedule(problem_for(a, g), no_prices));
  }
  rebuild_aggregate();
  refresh_prices();
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    const int g = owner_group(static_cast<int>(a));
    state_.schedules[a].objective =
        bev_objective(problem_for(agents_[a], g), state_.prices, state_.schedules[a].s);
  }
  initial_variance_ = load_variance();
  check_caps();
  track_conservation();
}

int TrialEngine::owner_group(int vehicle) const {
  for (std::size_t u = 0; u < user_agent_.size(); ++u)
    if (user_agent_[u] == vehicle) return user_group_[u];
  return 0;
}

BevProblem TrialEngine::problem_for(const BevAgent& a, int group) const {
  BevProblem p;
  p.window = a.window;
  p.battery_kwh = a.spec.battery_kwh;
  p.rated_kw = a.spec.rated_kw;
  p.soc_arrival = a.soc_arrival;
  p.t_req = a.t_req;
  p.t_max = mode_ == Mode::RtpOnly ? a.t_req : a.t_max;
  p.omega = group_problem_[group].omega;
  p.theta = group_problem_[group].theta;
  return p;
}

void TrialEngine::rebuild_aggregate() {
  std::fill(state_.aggregate.begin(), state_.aggregate.end(), 0.0);
  for (const auto& load : state_.loads)
    for (std::size_t t = 0; t < load.size(); ++t) state_.aggregate[t] += load[t];
  for (std::size_t a = 0; a < agents_.size(); ++a)
    for (int t : agents_[a].window)
      state_.aggregate[t] += agents_[a].spec.rated_kw * state_.schedules[a].s[t];
}

void TrialEngine::price_into(std::vector<double>& out) const {
  if (s_.price_basis == PriceBasis::Demand) {
    kernels::scaled_affine(s_.gen.lambda, s_.gen.a, state_.aggregate, s_.gen.b, out);
  } else {
    const GenerationPlan plan = generation_plan(s_.gen, state_.aggregate);
    kernels::scaled_affine(s_.gen.lambda, s_.gen.a, plan.g, s_.gen.b, out);
  }
}

std::vector<double> TrialEngine::current_prices() const {
  std::vector<double> p(state_.aggregate.size());
  price_into(p);
  return p;
}

void TrialEngine::refresh_prices() {
  state_.prices.resize(state_.aggregate.size());
  price_into(state_.prices);
}

void TrialEngine::check_caps() const {
  for (std::size_t t = 0; t < state_.aggregate.size(); ++t) {
    const double cap = std::min(s_.gen.g_cap[t], s_.gen.l_cap[t]);
    if (state_.aggregate[t] > cap)
      throw CurtailmentRequired(static_cast<int>(t), state_.aggregate[t], cap,
                                "trial " + std::to_string(trial_) + ", round " +
                                    std::to_string(state_.round));
  }
}

double TrialEngine::utility_of_user(int user, std::span<const double> prices) const {
  const int g = user_group_[user];
  double u = household_objective(group_problem_[g], prices, state_.loads[user]);
  const int a = user_agent_[user];
  if (a >= 0) u += bev_objective(problem_for(agents_[a], g), prices, state_.schedules[a].s);
  return u;
}

bool TrialEngine::user_update(int user) {
  price_into(scratch_prices_);
  const int g = user_group_[user];
  bool changed = false;

  // Commit rule: a candidate solved at frozen prices is committed only when
  // its gain clears the mover's own price impact 0.5*sum_t lambda_t*a_t*d_t^2
  // (d = load delta).  Each commit then strictly increases
  //   sum_u psi_u - sum_t lambda_t*(0.5*a_t*L_t^2 + b_t*L_t),
  // so asynchronous rounds cannot cycle; without the margin, near-tied
  // whole-kW V2G flips ping-pong forever above the convergence tolerance.
  const auto impact_coeff = [this](int t) { return s_.gen.lambda[t] * s_.gen.a[t]; };

  HouseholdSolution hs = best_response(group_problem_[g], scratch_prices_);
  auto& cur = state_.loads[user];
  if (!std::equal(cur.begin(), cur.end(), hs.load.begin())) {
    const double old_obj = household_objective(group_problem_[g], scratch_prices_, cur);
    const double new_obj = household_objective(group_problem_[g], scratch_prices_, hs.load);
    double impact = 0.0;
    for (std::size_t t = 0; t < cur.size(); ++t) {
      const double d = hs.load[t] - cur[t];
      impact += impact_coeff(static_cast<int>(t)) * d * d;
    }
    if (new_obj > old_obj + 0.5 * impact + 1e-9 * (1.0 + std::fabs(old_obj))) {
      kernels::add_diff(state_.aggregate, hs.load, cur);
      cur.swap(hs.load);
      changed = true;
    }
  }

  const int a = user_agent_[user];
  if (a >= 0) {
    const BevProblem prob = problem_for(agents_[a], g);
    auto& sched = state_.schedules[a];
    const double old_obj = bev_objective(prob, scratch_prices_, sched.s);
    BevSchedule cand = optimize_schedule(prob, scratch_prices_);
    double impact = 0.0;
    for (int t : agents_[a].window) {
      const double d = prob.rated_kw * (cand.s[t] - sched.s[t]);
      impact += impact_coeff(t) * d * d;
    }
    if (cand.objective > old_obj + 0.5 * impact + 1e-9 * (1.0 + std::fabs(old_obj))) {
      for (int t : agents_[a].window)
        state_.aggregate[t] += prob.rated_kw * (cand.s[t] - sched.s[t]);
      sched = std::move(cand);
      changed = true;
    } else {
      sched.objective = old_obj;
    }
  }
  return changed;
}

double TrialEngine::run_round() {
  const std::vector<double> before = state_.aggregate;
  for (int u : visit_order_) user_update(u);
  rebuild_aggregate();  // drop incremental-update rounding drift
  ++state_.round;
  track_conservation();
  check_caps();
  return kernels::max_rel_gap(state_.aggregate, before);
}

void TrialEngine::run() {
  if (mode_ == Mode::Baseline) {
    converged_ = true;
    refresh_prices();
    return;
  }
  while (state_.round < s_.max_rounds) {
    const double gap = run_round();
    if (gap < s_.epsilon) {
      converged_ = true;
      break;
    }
  }
  refresh_prices();
}

void TrialEngine::track_conservation() {
  for (std::size_t u = 0; u < state_.loads.size(); ++u) {
    const double total = kernels::sum(state_.loads[u]);
    const double required = group_problem_[user_group_[u]].required;
    const double gap = required > 0 ? std::fabs(total - required) / required
                                    : std::fabs(total);
    conservation_gap_ = std::max(conservation_gap_, gap);
  }
}

double TrialEngine::load_variance() const {
  const double mean =
      kernels::sum(state_.aggregate) / static_cast<double>(state_.aggregate.size());
  double var = 0;
  for (double x : state_.aggregate) var += (x - mean) * (x - mean);
  return var;
}

TrialResult run_trial(const Scenario& s, Mode mode, std::uint64_t trial) {
  TrialEngine eng(s, mode, trial);
  eng.run();

  TrialResult r;
  r.trial = static_cast<int>(trial);
  r.converged = eng.converged();
  r.rounds = eng.rounds();
  r.conservation_gap = eng.conservation_gap();
  r.initial_load_variance = eng.initial_load_variance();
  r.final_load_variance = eng.load_variance();
  r.aggregate = eng.state().aggregate;
  r.prices = eng.state().prices;
  if (s.price_basis == PriceBasis::Demand)
    r.generation = r.aggregate;
  else
    r.generation = generation_plan(s.gen, r.aggregate).g;

  const int slots = s.grid.slot_count;
  r.group_load.assign(s.groups.size(), std::vector<double>(slots, 0.0));
  for (std::size_t u = 0; u < eng.state().loads.size(); ++u) {
    auto& acc = r.group_load[eng.group_of(static_cast<int>(u))];
    const auto& load = eng.state().loads[u];
    for (int t = 0; t < slots; ++t) acc[t] += load[t];
  }
  r.bev_load.assign(slots, 0.0);
  r.agent_count = static_cast<int>(eng.agents().size());
  for (std::size_t a = 0; a < eng.agents().size(); ++a) {
    const auto& agent = eng.agents()[a];
    const auto& sched = eng.state().schedules[a];
    for (int t : agent.window) r.bev_load[t] += agent.spec.rated_kw * sched.s[t];
    if (!agent.window.empty()) {
      const double final_soc = sched.soc_path[agent.window.back()];
      if (std::fabs(final_soc - agent.spec.battery_kwh) > 1e-9) r.soc_full_at_departure = false;
    }
    for (double soc : sched.soc_path)
      if (soc < -1e-9 || soc > agent.spec.battery_kwh + 1e-9) r.soc_path_in_range = false;
  }
  return r;
}

std::vector<TrialResult> run_all(const Scenario& s, Mode mode, int threads) {
  const int n = s.trials;
  std::vector<TrialResult> results(n);
  if (threads <= 1) {
    for (int t = 0; t < n; ++t) results[t] = run_trial(s, mode, static_cast<std::uint64_t>(t));
    return results;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= n) return;
      try {
        results[t] = run_trial(s, mode, static_cast<std::uint64_t>(t));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(threads, n);
  pool.reserve(count);
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace drsim
