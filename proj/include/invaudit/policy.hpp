#pragma once

#include <memory>
#include <string>
#include <vector>

#include "invaudit/sim.hpp"

namespace invaudit {

// Replenishment policies under audit. `scaled` wraps another policy; with
// the default target mode the order-up-to level is scaled before the
// inventory position is subtracted, with order mode the order itself is.
struct Policy {
  enum class Kind { newsvendor, base_stock, scaled };
  enum class ScaleMode { target, order };

  Kind kind = Kind::newsvendor;
  double quantile = 0.0;  // 0 means "use the critical-ratio default"
  long base_stock_level = 0;
  std::shared_ptr<const Policy> inner;
  double factor = 1.0;
  ScaleMode scale_mode = ScaleMode::target;

  static Policy newsvendor(double q = 0.0);
  static Policy base_stock(long level);
  static Policy scaled(Policy inner, double factor,
                       ScaleMode mode = ScaleMode::target);
};

// Critical-ratio service level, clamped to (0.5, 0.999).
double default_quantile(const ProductConfig& config);

// Order-up-to target for the newsvendor policy: smallest S with
// CDF_{demand over E[VLT]+1 periods at the current rate}(S) >= q.
long newsvendor_target(const SimState& state, const ProductConfig& config,
                       double q);
long newsvendor_action(const SimState& state, const ProductConfig& config,
                       double q);

// round(inner_action * factor), half-up.
long scaled_action(long inner_action, double factor);

long policy_action(const Policy& policy, const SimState& state,
                   const ProductConfig& config);

// Adapter so policies drive the simulator.
class PolicySource final : public ActionSource {
 public:
  explicit PolicySource(Policy policy) : policy_(std::move(policy)) {}
  long order_for(const SimState& state,
                 const ProductConfig& config) const override {
    return policy_action(policy_, state, config);
  }
  const Policy& policy() const { return policy_; }

 private:
  Policy policy_;
};

// Picks the base-stock level with the best mean simulated total reward
// across seeds; ties go to the smaller level.
Policy tune_base_stock(const ProductConfig& config,
                       const std::vector<long>& candidate_grid, int n_seeds,
                       std::uint64_t seed_base = 0);

}  // namespace invaudit
