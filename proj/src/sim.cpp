#include "invaudit/sim.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace invaudit {

long round_half_up(double x) {
  return static_cast<long>(std::floor(x + 0.5));
}

double DemandModel::rate_at(long t) const {
  const double season =
      seasonal_period > 0.0
          ? seasonal_amplitude *
                std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                         seasonal_period)
          : 0.0;
  const double rate =
      base_rate * (1.0 + season) + trend * static_cast<double>(t);
  return std::max(0.01, rate);
}

long DemandModel::sample(long t, const RngKey& key) const {
  const double u = draw_uniform(key);
  const double lambda = rate_at(t);
  if (family == Family::poisson) return poisson_icdf(lambda, u);
  return neg_binomial_icdf(lambda, nb_dispersion, u);
}

long DemandModel::aggregate_quantile(long t, double periods, double q) const {
  const double mean = rate_at(t) * periods;
  if (family == Family::poisson) return poisson_icdf(mean, q);
  // Sum of independent NB periods keeps the per-period dispersion scaling.
  return neg_binomial_icdf(mean, nb_dispersion * periods, q);
}

VltModel VltModel::deterministic(int lead_time, int l_max) {
  VltModel m;
  m.pmf.assign(static_cast<std::size_t>(l_max), 0.0);
  m.pmf.at(static_cast<std::size_t>(lead_time - 1)) = 1.0;
  return m;
}

double VltModel::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i)
    m += pmf[i] * static_cast<double>(i + 1);
  return m;
}

int VltModel::sample(const RngKey& key) const {
  const double u = draw_uniform(key);
  double c = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    c += pmf[i];
    if (u < c) return static_cast<int>(i + 1);
  }
  return static_cast<int>(pmf.size());
}

void VltModel::validate() const {
  if (pmf.empty()) throw std::invalid_argument("vlt pmf empty");
  double sum = 0.0;
  for (double p : pmf) {
    if (p < 0.0) throw std::invalid_argument("vlt pmf entry negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("vlt pmf does not sum to 1");
}

void ProductConfig::validate() const {
  if (!(price > unit_cost) || !(unit_cost > 0.0))
    throw std::invalid_argument("require price > unit_cost > 0");
  if (holding_cost < 0.0) throw std::invalid_argument("holding_cost < 0");
  if (lost_sale_penalty < 0.0)
    throw std::invalid_argument("lost_sale_penalty < 0");
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::invalid_argument("gamma must be in (0, 1]");
  if (l_max < 1) throw std::invalid_argument("l_max < 1");
  if (horizon < 1) throw std::invalid_argument("horizon < 1");
  vlt.validate();
  if (static_cast<int>(vlt.pmf.size()) != l_max)
    throw std::invalid_argument("vlt support must be {1..l_max}");
}

SimState SimState::initial(const ProductConfig& config) {
  SimState s;
  s.pipeline.assign(static_cast<std::size_t>(config.l_max), 0);
  return s;
}

long SimState::pipeline_total() const {
  return std::accumulate(pipeline.begin(), pipeline.end(), 0L);
}

PeriodRecord step(SimState& state, long order_qty, const ProductConfig& config,
                  std::uint64_t seed) {
  if (order_qty < 0) throw std::invalid_argument("order_qty < 0");

  PeriodRecord rec;
  rec.t = state.t;
  rec.on_hand_start = state.on_hand;
  rec.pipeline_start = state.pipeline_total();
  rec.order = order_qty;

  // (1) arrivals
  rec.arrivals = state.pipeline.front();
  state.on_hand += rec.arrivals;
  state.pipeline.erase(state.pipeline.begin());
  state.pipeline.push_back(0);

  // (2) demand
  const std::uint64_t pid = static_cast<std::uint64_t>(config.id);
  const std::uint64_t week = static_cast<std::uint64_t>(state.t);
  rec.demand = config.demand.sample(
      state.t, RngKey{seed, pid, week, Stream::demand, 0});

  // (3) sales, lost sales
  rec.sales = std::min(rec.demand, state.on_hand);
  state.on_hand -= rec.sales;
  rec.lost_sales = rec.demand - rec.sales;

  // (4) order placement
  const int lead = config.vlt.sample(RngKey{seed, pid, week, Stream::vlt, 0});
  state.pipeline.at(static_cast<std::size_t>(lead - 1)) += order_qty;

  // (5) reward
  rec.reward = config.price * static_cast<double>(rec.sales) -
               config.unit_cost * static_cast<double>(order_qty) -
               config.holding_cost * static_cast<double>(state.on_hand) -
               config.lost_sale_penalty * static_cast<double>(rec.lost_sales);

  ++state.t;
  return rec;
}

Trajectory simulate(const ActionSource& policy, const ProductConfig& config,
                    std::uint64_t seed, const OverrideMap& overrides) {
  if (config.horizon < 1) throw std::invalid_argument("horizon < 1");
  SimState state = SimState::initial(config);
  Trajectory traj;
  traj.records.reserve(static_cast<std::size_t>(config.horizon));
  double discount = 1.0;
  for (long t = 0; t < config.horizon; ++t) {
    long order = policy.order_for(state, config);
    auto it = overrides.find(t);
    if (it != overrides.end())
      order = std::max(0L, round_half_up(static_cast<double>(order) * it->second));
    PeriodRecord rec = step(state, order, config, seed);
    traj.total_discounted_reward += discount * rec.reward;
    discount *= config.gamma;
    traj.records.push_back(rec);
  }
  return traj;
}

std::pair<Trajectory, Trajectory> counterfactual_pair(
    const ActionSource& policy, const ProductConfig& config,
    std::uint64_t seed, long t0, double multiplier) {
  if (t0 >= config.horizon) throw std::invalid_argument("t0 out of horizon");
  if (!(multiplier > 0.0)) throw std::invalid_argument("multiplier <= 0");
  Trajectory base = simulate(policy, config, seed);
  Trajectory deviated = simulate(policy, config, seed, {{t0, multiplier}});
  return {std::move(base), std::move(deviated)};
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os << "t,on_hand_start,arrivals,demand,sales,lost_sales,order,reward\n";
  for (const auto& r : records) {
    os << r.t << ',' << r.on_hand_start << ',' << r.arrivals << ','
       << r.demand << ',' << r.sales << ',' << r.lost_sales << ',' << r.order
       << ',' << r.reward << '\n';
  }
  return os.str();
}

}  // namespace invaudit
