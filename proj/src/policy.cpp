#include "invaudit/policy.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace invaudit {

Policy Policy::newsvendor(double q) {
  Policy p;
  p.kind = Kind::newsvendor;
  p.quantile = q;
  return p;
}

Policy Policy::base_stock(long level) {
  if (level < 0) throw std::invalid_argument("base stock level < 0");
  Policy p;
  p.kind = Kind::base_stock;
  p.base_stock_level = level;
  return p;
}

Policy Policy::scaled(Policy inner, double factor, ScaleMode mode) {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor <= 0");
  Policy p;
  p.kind = Kind::scaled;
  p.inner = std::make_shared<const Policy>(std::move(inner));
  p.factor = factor;
  p.scale_mode = mode;
  return p;
}

double default_quantile(const ProductConfig& config) {
  const double under = config.price - config.unit_cost + config.lost_sale_penalty;
  const double over = config.holding_cost * config.vlt.mean();
  const double q = under / (under + over);
  return std::clamp(q, 0.5 + 1e-9, 0.999);
}

long newsvendor_target(const SimState& state, const ProductConfig& config,
                       double q) {
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("q not in (0,1)");
  const double periods = config.vlt.mean() + 1.0;
  return config.demand.aggregate_quantile(state.t, periods, q);
}

long newsvendor_action(const SimState& state, const ProductConfig& config,
                       double q) {
  const long target = newsvendor_target(state, config, q);
  const long ip = state.on_hand + state.pipeline_total();
  return std::max(0L, target - ip);
}

long scaled_action(long inner_action, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor <= 0");
  return round_half_up(static_cast<double>(inner_action) * factor);
}

namespace {

// Order-up-to level of a policy, when it has one.
std::optional<long> policy_target(const Policy& policy, const SimState& state,
                                  const ProductConfig& config) {
  switch (policy.kind) {
    case Policy::Kind::newsvendor: {
      const double q =
          policy.quantile > 0.0 ? policy.quantile : default_quantile(config);
      return newsvendor_target(state, config, q);
    }
    case Policy::Kind::base_stock:
      return policy.base_stock_level;
    case Policy::Kind::scaled: {
      if (policy.scale_mode != Policy::ScaleMode::target) return std::nullopt;
      auto inner = policy_target(*policy.inner, state, config);
      if (!inner) return std::nullopt;
      return round_half_up(static_cast<double>(*inner) * policy.factor);
    }
  }
  return std::nullopt;
}

}  // namespace

long policy_action(const Policy& policy, const SimState& state,
                   const ProductConfig& config) {
  switch (policy.kind) {
    case Policy::Kind::newsvendor:
    case Policy::Kind::base_stock: {
      const long target = *policy_target(policy, state, config);
      const long ip = state.on_hand + state.pipeline_total();
      return std::max(0L, target - ip);
    }
    case Policy::Kind::scaled: {
      if (policy.scale_mode == Policy::ScaleMode::target) {
        auto target = policy_target(policy, state, config);
        if (target) {
          const long ip = state.on_hand + state.pipeline_total();
          return std::max(0L, *target - ip);
        }
      }
      const long inner = policy_action(*policy.inner, state, config);
      return std::max(0L, scaled_action(inner, policy.factor));
    }
  }
  throw std::logic_error("unreachable policy kind");
}

Policy tune_base_stock(const ProductConfig& config,
                       const std::vector<long>& candidate_grid, int n_seeds,
                       std::uint64_t seed_base) {
  if (candidate_grid.empty()) throw std::invalid_argument("empty grid");
  if (n_seeds < 1) throw std::invalid_argument("n_seeds < 1");

  std::vector<long> grid = candidate_grid;
  std::sort(grid.begin(), grid.end());

  long best_level = grid.front();
  double best_mean = -std::numeric_limits<double>::infinity();
  for (long level : grid) {
    PolicySource source(Policy::base_stock(level));
    double total = 0.0;
    for (int i = 0; i < n_seeds; ++i) {
      const std::uint64_t seed = detail::splitmix64(
          seed_base ^ (static_cast<std::uint64_t>(Stream::tuning) << 32) ^
          static_cast<std::uint64_t>(i));
      total += simulate(source, config, seed).total_discounted_reward;
    }
    const double mean = total / static_cast<double>(n_seeds);
    if (mean > best_mean) {  // strict: ties keep the smaller level
      best_mean = mean;
      best_level = level;
    }
  }
  return Policy::base_stock(best_level);
}

}  // namespace invaudit
