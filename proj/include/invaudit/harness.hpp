#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "invaudit/bandit.hpp"
#include "invaudit/eval.hpp"
#include "invaudit/policy.hpp"
#include "invaudit/sim.hpp"

namespace invaudit {

struct ProductGeneratorSpec {
  // Heterogeneity lives mostly in the demand process; the economics ranges
  // are kept narrow so a single linear reward model remains a sane pooled
  // fit across the cohort.
  long count = 1000;
  double price_lo = 8.0, price_hi = 12.0;
  double margin_lo = 0.45, margin_hi = 0.55;  // unit_cost = price * (1 - margin)
  double holding_lo = 0.02, holding_hi = 0.04;  // fraction of price per period
  double penalty_lo = 0.3, penalty_hi = 0.6;    // fraction of price
  double base_rate_lo = 10.0, base_rate_hi = 40.0;
  double seasonal_amplitude_lo = 0.0, seasonal_amplitude_hi = 0.3;
  double seasonal_period = 52.0;
  double trend_lo = -0.02, trend_hi = 0.02;
  int l_max = 4;
  double gamma = 0.999;
  std::string demand_family = "poisson";
  double nb_dispersion = 4.0;
};

struct PolicySpec {
  std::string name;
  std::string kind;  // newsvendor | base_stock | tuned_base_stock
  double quantile = 0.0;
  long base_stock_level = 0;
  double scale = 1.0;
  std::string scale_mode = "target";  // or "order"
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  int n_seeds = 1;          // test-phase replications
  long train_horizon = 104;
  int train_replicas = 2;
  long test_horizon = 52;
  std::optional<ProductGeneratorSpec> generator;
  std::vector<ProductConfig> explicit_products;
  std::vector<PolicySpec> policies;
  BanditConfig bandit;
  std::string schedule_mode = "per_product_random_week";
  std::vector<long> explicit_schedule;
  std::string output_dir = "out";

  std::vector<ProductConfig> make_products() const;
};

struct ValidationResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty() && config.has_value(); }
};

ValidationResult validate_config(const std::string& raw_json);
std::string config_echo_json(const ExperimentConfig& config);

// Resolve a policy spec into one Policy per product; tuned_base_stock runs a
// per-product grid search on training seeds.
std::vector<Policy> resolve_policy(const PolicySpec& spec,
                                   const std::vector<ProductConfig>& products,
                                   long train_horizon,
                                   std::uint64_t master_seed, bool parallel);

struct PolicyArtifacts {
  AuditReport report;
  std::vector<ActionLogEntry> action_log;
  std::vector<ModelSnapshot> snapshots;
  std::vector<double> bandit_rewards, baseline_rewards, oracle_rewards;
};

struct ExperimentArtifacts {
  std::vector<PolicyArtifacts> per_policy;
  std::string table_text;
  std::string machine_json;
};

ExperimentArtifacts run_experiment(const ExperimentConfig& config,
                                   bool parallel = true);

// Writes report.txt, report.json and per-policy logs under output_dir.
void write_artifacts(const ExperimentConfig& config,
                     const ExperimentArtifacts& artifacts);

// Hindsight-best rollouts for a cohort; the parallel path and the serial
// reference must produce identical results.
std::vector<OracleResult> cohort_oracle(
    const std::vector<Policy>& policies,
    const std::vector<ProductConfig>& products,
    const std::vector<long>& weeks, std::uint64_t seed,
    const std::vector<double>& multipliers, bool parallel);

}  // namespace invaudit
