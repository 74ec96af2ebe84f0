#include "invaudit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace invaudit {

OracleResult oracle_best(const ActionSource& policy,
                         const ProductConfig& config, std::uint64_t seed,
                         long t0, const std::vector<double>& multipliers) {
  if (t0 >= config.horizon) throw std::invalid_argument("t0 out of horizon");
  OracleResult result;
  result.rewards.reserve(multipliers.size());
  for (double m : multipliers)
    result.rewards.push_back(
        simulate(policy, config, seed, {{t0, m}}).total_discounted_reward);

  const double top =
      *std::max_element(result.rewards.begin(), result.rewards.end());
  std::size_t best = multipliers.size();
  for (std::size_t i = 0; i < multipliers.size(); ++i)
    if (result.rewards[i] == top && multipliers[i] == 1.0) best = i;
  if (best == multipliers.size())
    for (std::size_t i = 0; i < multipliers.size(); ++i)
      if (result.rewards[i] == top) {
        best = i;
        break;
      }
  result.best_multiplier = multipliers[best];
  result.best_reward = result.rewards[best];
  return result;
}

std::optional<double> delta_improvement(double r_bandit, double r_baseline,
                                        double r_oracle) {
  if (!std::isfinite(r_bandit) || !std::isfinite(r_baseline) ||
      !std::isfinite(r_oracle))
    throw std::invalid_argument("non-finite reward");
  const double denom = r_oracle - r_baseline;
  if (std::abs(denom) < 1e-9 * std::max(1.0, std::abs(r_baseline)))
    return std::nullopt;
  return (r_bandit - r_baseline) / denom;
}

std::vector<WeekAudit> passive_audit(const std::vector<ModelSnapshot>& snapshots,
                                     const Trajectory& trajectory,
                                     const ProductConfig& config,
                                     const BanditConfig& bandit_config,
                                     double tolerance) {
  const std::size_t base_idx = bandit_config.baseline_index();
  std::vector<WeekAudit> audits;
  audits.reserve(trajectory.records.size());

  for (std::size_t w = 0; w < trajectory.records.size(); ++w) {
    const PeriodRecord& rec = trajectory.records[w];
    WeekAudit audit;
    audit.week = rec.t;

    const ModelSnapshot* latest = nullptr;
    for (const auto& s : snapshots)
      if (s.week <= rec.t) latest = &s;
    if (latest == nullptr) {
      audit.flag = EquilibriumFlag::unauditable;
      audits.push_back(audit);
      continue;
    }

    // The decision-time state is exactly what the record preserves.
    SimState state;
    state.on_hand = rec.on_hand_start;
    state.pipeline.assign(static_cast<std::size_t>(config.l_max), 0);
    state.pipeline.back() = rec.pipeline_start;
    state.t = rec.t;
    const std::vector<double> x = build_features(
        config, state,
        {trajectory.records.begin(),
         trajectory.records.begin() + static_cast<long>(w)},
        bandit_config.H);

    std::vector<double> preds;
    preds.reserve(bandit_config.multipliers.size());
    for (double m : bandit_config.multipliers)
      preds.push_back(predict(latest->model, x, m));
    preds = boosted_predictions(preds, base_idx, bandit_config.baseline_boost);
    const std::size_t best = argmax_with_tiebreak(preds, base_idx);
    audit.argmax_multiplier = bandit_config.multipliers[best];
    audit.flag = preds[base_idx] >= (1.0 - tolerance) * preds[best]
                     ? EquilibriumFlag::in_equilibrium
                     : EquilibriumFlag::out_of_equilibrium;
    audits.push_back(audit);
  }
  return audits;
}

EquilibriumGap brute_force_equilibrium_gap(
    const ActionSource& policy, const ProductConfig& config,
    const std::vector<std::uint64_t>& seeds, const std::vector<long>& schedule,
    const std::vector<double>& multipliers) {
  if (seeds.empty()) throw std::invalid_argument("no seeds");
  const std::size_t k = schedule.size();
  const std::size_t n_actions = multipliers.size();
  double combos = 1.0;
  for (std::size_t i = 0; i < k; ++i) combos *= static_cast<double>(n_actions);
  if (combos > 6561.0)
    throw std::invalid_argument("brute-force search space exceeds 3^8");
  const auto n_combos = static_cast<std::size_t>(combos);

  EquilibriumGap gap;
  for (std::uint64_t seed : seeds) {
    const double base =
        simulate(policy, config, seed).total_discounted_reward;
    double best = base;
    std::vector<std::size_t> best_assign(k, 0);
    std::vector<std::size_t> assign(k, 0);
    for (std::size_t c = 0; c < n_combos; ++c) {
      std::size_t rem = c;
      OverrideMap overrides;
      for (std::size_t i = 0; i < k; ++i) {
        assign[i] = rem % n_actions;
        rem /= n_actions;
        overrides[schedule[i]] = multipliers[assign[i]];
      }
      const double r =
          simulate(policy, config, seed, overrides).total_discounted_reward;
      if (r > best) {
        best = r;
        best_assign = assign;
      }
    }
    gap.per_seed.push_back((best - base) / static_cast<double>(config.horizon));
    gap.best_assignment = best_assign;
  }
  double sum = 0.0;
  for (double g : gap.per_seed) sum += g;
  gap.epsilon_hat = sum / static_cast<double>(gap.per_seed.size());
  return gap;
}

AuditReport build_report(const std::string& policy_name,
                         const std::vector<ActionLogEntry>& action_log,
                         const std::vector<double>& bandit_rewards,
                         const std::vector<double>& baseline_rewards,
                         const std::vector<double>& oracle_rewards) {
  if (bandit_rewards.size() != baseline_rewards.size() ||
      baseline_rewards.size() != oracle_rewards.size())
    throw std::invalid_argument("reward vectors must align");

  AuditReport report;
  report.policy_name = policy_name;
  report.n_products = bandit_rewards.size();

  if (action_log.empty()) {
    report.share_same = 1.0;  // no interventions: every action was baseline
  } else {
    for (const auto& e : action_log) {
      if (e.multiplier < 1.0)
        report.share_down += 1.0;
      else if (e.multiplier > 1.0)
        report.share_up += 1.0;
      else
        report.share_same += 1.0;
    }
    const double n = static_cast<double>(action_log.size());
    report.share_down /= n;
    report.share_same /= n;
    report.share_up /= n;
  }

  double sum_bandit = 0.0, sum_base = 0.0, sum_oracle = 0.0;
  for (std::size_t i = 0; i < bandit_rewards.size(); ++i) {
    sum_bandit += bandit_rewards[i];
    sum_base += baseline_rewards[i];
    sum_oracle += oracle_rewards[i];
    auto d = delta_improvement(bandit_rewards[i], baseline_rewards[i],
                               oracle_rewards[i]);
    if (d) report.per_product_delta.push_back(*d);
  }
  if (!bandit_rewards.empty())
    report.delta_i = delta_improvement(sum_bandit, sum_base, sum_oracle);
  return report;
}

std::string report_table(const std::vector<AuditReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(22) << "policy" << std::setw(30)
     << "% actions {down, same, up}" << std::setw(22) << "delta_I"
     << "epsilon_hat\n";
  for (const auto& r : reports) {
    std::ostringstream shares;
    shares << std::fixed << std::setprecision(1) << '{'
           << 100.0 * r.share_down << ", " << 100.0 * r.share_same << ", "
           << 100.0 * r.share_up << '}';
    std::ostringstream di;
    if (r.delta_i)
      di << std::fixed << std::setprecision(4) << *r.delta_i << " ("
         << std::setprecision(1) << 100.0 * *r.delta_i << "%)";
    else
      di << "undefined (baseline optimal)";
    os << std::left << std::setw(22) << r.policy_name << std::setw(30)
       << shares.str() << std::setw(22) << di.str();
    if (r.epsilon_hat)
      os << std::scientific << std::setprecision(3) << *r.epsilon_hat;
    else
      os << "-";
    os << '\n';
  }
  return os.str();
}

}  // namespace invaudit
