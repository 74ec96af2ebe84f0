#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "invaudit/policy.hpp"
#include "invaudit/sim.hpp"

namespace invaudit {

struct BanditConfig {
  enum class Exploration { epsilon_greedy, inverse_gap_weighting };

  int H = 12;
  double rho = 0.05;
  Exploration exploration = Exploration::epsilon_greedy;
  std::vector<double> multipliers = {0.8, 1.0, 1.2};
  double baseline_boost = 0.02;
  double ridge_lambda = 1.0;
  // Exploration schedule after k interventions: epsilon-greedy uses
  // min(1, decay_c / sqrt(k)), IGW uses rho * sqrt(k). Disabled -> fixed rho.
  bool decay = true;
  double decay_c = 1.0;
  // Fit one model per product instead of pooling labels across the cohort.
  bool per_product_model = false;

  std::size_t baseline_index() const;  // index of multiplier 1.0
  void validate() const;
};

struct TargetSchedule {
  std::vector<long> times;  // sorted, consecutive gaps >= H

  void validate(int H, long horizon) const;
  bool contains(long t) const;
};

// Static product features, current inventory, the last H demands and
// orders (zero-padded), and a constant term.
std::vector<double> build_features(const ProductConfig& config,
                                   const SimState& state,
                                   const std::vector<PeriodRecord>& history,
                                   int H);
int feature_dim(int H);

struct ThetaModel {
  std::vector<double> theta1, theta2, theta3;
};

struct LabeledExample {
  std::vector<double> x;
  double a = 1.0;      // multiplier played
  double y = 0.0;      // H-step discounted reward
  long product = -1;   // source product id (used by per-product models)
};

// y = sum_{k=0..H} gamma^k * reward_{tau+k}.
double build_label(const Trajectory& trajectory, long tau, int H,
                   double gamma);

// Ridge least squares over phi(x, a) = [x, (a-1)x, (a-1)^2 x]. With
// ridge_lambda = 0 a rank-deficient design yields the minimum-norm solution.
ThetaModel fit_model(const std::vector<LabeledExample>& history,
                     double ridge_lambda);

double predict(const ThetaModel& model, const std::vector<double>& x,
               double a);

// Predicted rewards with the baseline boost folded in: the baseline entry is
// multiplied by (1 + boost) when positive, divided when negative.
std::vector<double> boosted_predictions(std::vector<double> predictions,
                                        std::size_t baseline_index,
                                        double boost);

// Exploration distribution over the action set. Ties break toward the
// baseline action, then toward the lower multiplier.
std::vector<double> action_probabilities(const std::vector<double>& predictions,
                                         BanditConfig::Exploration exploration,
                                         double rho,
                                         std::size_t baseline_index,
                                         double baseline_boost);

std::size_t argmax_with_tiebreak(const std::vector<double>& values,
                                 std::size_t baseline_index);

struct ModelSnapshot {
  long week = -1;  // -1 marks a warm-start fit
  ThetaModel model;
};

struct ActionLogEntry {
  long product = 0;
  long week = 0;
  long baseline_order = 0;
  double multiplier = 1.0;
  std::vector<double> probabilities;
  std::vector<double> predictions;  // boosted, aligned with multipliers
};

struct BanditRunOptions {
  // Play uniformly random multipliers and skip model fits (training phase).
  bool collect_only = false;
  // Labels accumulated before this run (warm start).
  std::vector<LabeledExample> initial_history;
  std::optional<ThetaModel> initial_model;
  long initial_intervention_count = 0;
  Stream action_stream = Stream::bandit_action;
};

struct BanditRunResult {
  std::vector<Trajectory> trajectories;
  std::vector<ModelSnapshot> snapshots;
  std::vector<ActionLogEntry> action_log;
  std::vector<LabeledExample> history;  // initial + labels matured this run
};

// Algorithm loop: off-schedule weeks play the baseline policy; on scheduled
// weeks fit the pooled model, sample a multiplier, play it, and append the
// H-step label once the window closes. With per_product_model set, each
// product fits only its own labels and no pooled snapshots are recorded.
BanditRunResult run_bandit(const Policy& baseline,
                           const std::vector<TargetSchedule>& schedules,
                           const BanditConfig& bandit_config,
                           const std::vector<ProductConfig>& products,
                           std::uint64_t seed,
                           const BanditRunOptions& options = {});

// Per-product baselines (e.g. individually tuned base-stock levels).
BanditRunResult run_bandit(const std::vector<Policy>& baselines,
                           const std::vector<TargetSchedule>& schedules,
                           const BanditConfig& bandit_config,
                           const std::vector<ProductConfig>& products,
                           std::uint64_t seed,
                           const BanditRunOptions& options = {});

std::string action_log_csv(const std::vector<ActionLogEntry>& log,
                           const std::vector<double>& multipliers);
std::string snapshots_text(const std::vector<ModelSnapshot>& snapshots);

}  // namespace invaudit
