#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "invaudit/bandit.hpp"
#include "invaudit/policy.hpp"
#include "invaudit/sim.hpp"

namespace invaudit {

struct OracleResult {
  double best_multiplier = 1.0;
  double best_reward = 0.0;
  std::vector<double> rewards;  // aligned with the multiplier set
};

// Counterfactual rollout per multiplier under common random numbers;
// ties break toward multiplier 1, then lower.
OracleResult oracle_best(const ActionSource& policy,
                         const ProductConfig& config, std::uint64_t seed,
                         long t0, const std::vector<double>& multipliers);

// (r_bandit - r_baseline) / (r_oracle - r_baseline); nullopt when the
// denominator is negligible (baseline already optimal).
std::optional<double> delta_improvement(double r_bandit, double r_baseline,
                                        double r_oracle);

enum class EquilibriumFlag { in_equilibrium, out_of_equilibrium, unauditable };

struct WeekAudit {
  long week = 0;
  EquilibriumFlag flag = EquilibriumFlag::unauditable;
  double argmax_multiplier = 1.0;
};

// Any-time check: against the most recent snapshot fitted at or before each
// week, does the policy's own action (multiplier 1) predict within
// (1 - tolerance) of the argmax action? Nothing is executed.
std::vector<WeekAudit> passive_audit(const std::vector<ModelSnapshot>& snapshots,
                                     const Trajectory& trajectory,
                                     const ProductConfig& config,
                                     const BanditConfig& bandit_config,
                                     double tolerance);

struct EquilibriumGap {
  double epsilon_hat = 0.0;          // mean over seeds of (max gain)/T
  std::vector<double> per_seed;
  std::vector<std::size_t> best_assignment;  // multiplier indices, last seed
};

// Exhaustive search over multiplier assignments to the scheduled weeks.
// Capped at |multipliers|^|schedule| <= 6561 rollouts per seed.
EquilibriumGap brute_force_equilibrium_gap(
    const ActionSource& policy, const ProductConfig& config,
    const std::vector<std::uint64_t>& seeds, const std::vector<long>& schedule,
    const std::vector<double>& multipliers);

struct AuditReport {
  std::string policy_name;
  double share_down = 0.0, share_same = 0.0, share_up = 0.0;
  std::optional<double> delta_i;          // cohort-level, summed rewards
  std::vector<double> per_product_delta;  // per-product ratios where defined
  std::optional<double> epsilon_hat;
  std::size_t n_products = 0;
};

AuditReport build_report(const std::string& policy_name,
                         const std::vector<ActionLogEntry>& action_log,
                         const std::vector<double>& bandit_rewards,
                         const std::vector<double>& baseline_rewards,
                         const std::vector<double>& oracle_rewards);

std::string report_table(const std::vector<AuditReport>& reports);

}  // namespace invaudit
