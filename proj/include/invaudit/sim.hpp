#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "invaudit/rng.hpp"

namespace invaudit {

struct DemandModel {
  enum class Family { poisson, negative_binomial };
  Family family = Family::poisson;
  double base_rate = 8.0;
  double seasonal_amplitude = 0.0;  // in [0, 1)
  double seasonal_period = 52.0;
  double trend = 0.0;                // units / period / period
  double nb_dispersion = 4.0;        // only used by negative_binomial

  // Instantaneous rate, floored so it stays strictly positive.
  double rate_at(long t) const;
  long sample(long t, const RngKey& key) const;
  // Smallest integer S with CDF_{demand over `periods` periods at the
  // time-t rate}(S) >= q.
  long aggregate_quantile(long t, double periods, double q) const;
};

struct VltModel {
  // pmf[i] = probability of lead time i+1; support is {1, ..., L_max}.
  std::vector<double> pmf;

  static VltModel deterministic(int lead_time, int l_max);
  double mean() const;
  int sample(const RngKey& key) const;  // returns a lead time in {1..L_max}
  void validate() const;
};

struct ProductConfig {
  long id = 0;
  double price = 10.0;
  double unit_cost = 4.0;
  double holding_cost = 0.5;    // per unit per period
  double lost_sale_penalty = 2.0;
  double gamma = 0.999;
  DemandModel demand;
  VltModel vlt;
  int l_max = 4;
  long horizon = 52;

  void validate() const;  // throws std::invalid_argument on violation
};

struct SimState {
  long on_hand = 0;
  std::vector<long> pipeline;  // entry k = units arriving k+1 periods ahead
  long t = 0;

  static SimState initial(const ProductConfig& config);
  long pipeline_total() const;
};

struct PeriodRecord {
  long t = 0;
  long on_hand_start = 0;      // before arrivals
  long pipeline_start = 0;     // before arrivals
  long arrivals = 0;
  long demand = 0;
  long sales = 0;
  long lost_sales = 0;
  long order = 0;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<PeriodRecord> records;
  double total_discounted_reward = 0.0;

  std::string to_csv() const;
};

// One review period: arrivals, demand, sales, order placement, reward.
PeriodRecord step(SimState& state, long order_qty, const ProductConfig& config,
                  std::uint64_t seed);

// A policy maps the observed state to a nonnegative order quantity.
class ActionSource {
 public:
  virtual ~ActionSource() = default;
  virtual long order_for(const SimState& state,
                         const ProductConfig& config) const = 0;
};

// Order multipliers applied on specific weeks, on top of the policy's order.
using OverrideMap = std::map<long, double>;

Trajectory simulate(const ActionSource& policy, const ProductConfig& config,
                    std::uint64_t seed, const OverrideMap& overrides = {});

// Baseline rollout plus a rollout with the week-t0 order scaled by
// `multiplier`, under shared demand/VLT streams.
std::pair<Trajectory, Trajectory> counterfactual_pair(
    const ActionSource& policy, const ProductConfig& config,
    std::uint64_t seed, long t0, double multiplier);

// round(x) with halves going up.
long round_half_up(double x);

}  // namespace invaudit
