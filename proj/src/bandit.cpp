#include "invaudit/bandit.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace invaudit {

std::size_t BanditConfig::baseline_index() const {
  for (std::size_t i = 0; i < multipliers.size(); ++i)
    if (multipliers[i] == 1.0) return i;
  throw std::invalid_argument("multipliers must contain 1.0");
}

void BanditConfig::validate() const {
  if (H < 0) throw std::invalid_argument("H < 0");
  if (rho < 0.0) throw std::invalid_argument("rho < 0");
  if (baseline_boost < 0.0) throw std::invalid_argument("baseline_boost < 0");
  if (ridge_lambda < 0.0) throw std::invalid_argument("ridge_lambda < 0");
  if (multipliers.empty()) throw std::invalid_argument("empty action set");
  for (std::size_t i = 0; i + 1 < multipliers.size(); ++i)
    if (!(multipliers[i] < multipliers[i + 1]))
      throw std::invalid_argument("multipliers must be strictly increasing");
  if (!(multipliers.front() > 0.0))
    throw std::invalid_argument("multipliers must be positive");
  baseline_index();  // throws when 1.0 is missing
}

void TargetSchedule::validate(int H, long horizon) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0 || times[i] + H >= horizon)
      throw std::invalid_argument(
          "target week " + std::to_string(times[i]) +
          " leaves no room for an H-step label within the horizon");
    if (i > 0 && times[i] - times[i - 1] < H)
      throw std::invalid_argument(
          "target weeks " + std::to_string(times[i - 1]) + " and " +
          std::to_string(times[i]) + " are closer than H");
  }
}

bool TargetSchedule::contains(long t) const {
  return std::binary_search(times.begin(), times.end(), t);
}

int feature_dim(int H) { return 4 + 2 + H + H + 1; }

std::vector<double> build_features(const ProductConfig& config,
                                   const SimState& state,
                                   const std::vector<PeriodRecord>& history,
                                   int H) {
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(feature_dim(H)));
  x.push_back(config.price);
  x.push_back(config.unit_cost);
  x.push_back(config.holding_cost);
  x.push_back(config.lost_sale_penalty);
  x.push_back(static_cast<double>(state.on_hand));
  x.push_back(static_cast<double>(state.pipeline_total()));
  const long n = static_cast<long>(history.size());
  for (int k = 1; k <= H; ++k)  // most recent first, zero-padded
    x.push_back(n - k >= 0 ? static_cast<double>(history[n - k].demand) : 0.0);
  for (int k = 1; k <= H; ++k)
    x.push_back(n - k >= 0 ? static_cast<double>(history[n - k].order) : 0.0);
  x.push_back(1.0);
  return x;
}

double build_label(const Trajectory& trajectory, long tau, int H,
                   double gamma) {
  if (tau < 0 || tau + H >= static_cast<long>(trajectory.records.size()))
    throw std::invalid_argument("label window exceeds trajectory");
  double y = 0.0;
  double discount = 1.0;
  for (int k = 0; k <= H; ++k) {
    y += discount * trajectory.records[static_cast<std::size_t>(tau + k)].reward;
    discount *= gamma;
  }
  return y;
}

namespace {

void stacked_row(const LabeledExample& ex, Eigen::Index d,
                 Eigen::VectorXd& row) {
  if (static_cast<Eigen::Index>(ex.x.size()) != d)
    throw std::invalid_argument("inconsistent feature dimension");
  if (!std::isfinite(ex.y) || !std::isfinite(ex.a))
    throw std::invalid_argument("non-finite label");
  const double u = ex.a - 1.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double v = ex.x[static_cast<std::size_t>(j)];
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature");
    row(j) = v;
    row(d + j) = u * v;
    row(2 * d + j) = u * u * v;
  }
}

// Running normal equations so refits on growing histories stay cheap.
// Accumulating examples one at a time in history order makes the incremental
// path produce the same matrix as a fresh pass over the same labels.
struct NormalAccumulator {
  Eigen::MatrixXd gram;
  Eigen::VectorXd xty;
  Eigen::VectorXd row;
  Eigen::Index d = 0;
  long n = 0;

  void init(Eigen::Index dim) {
    d = dim;
    gram = Eigen::MatrixXd::Zero(3 * d, 3 * d);
    xty = Eigen::VectorXd::Zero(3 * d);
    row.resize(3 * d);
    n = 0;
  }

  void add(const LabeledExample& ex) {
    stacked_row(ex, d, row);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(row, 1.0);
    xty += ex.y * row;
    ++n;
  }

  ThetaModel solve(double ridge_lambda) const {
    Eigen::MatrixXd lhs = gram.selfadjointView<Eigen::Lower>();
    lhs.diagonal().array() += ridge_lambda;
    const Eigen::VectorXd theta = lhs.ldlt().solve(xty);
    ThetaModel model;
    model.theta1.assign(theta.data(), theta.data() + d);
    model.theta2.assign(theta.data() + d, theta.data() + 2 * d);
    model.theta3.assign(theta.data() + 2 * d, theta.data() + 3 * d);
    return model;
  }
};

}  // namespace

ThetaModel fit_model(const std::vector<LabeledExample>& history,
                     double ridge_lambda) {
  if (history.empty()) throw std::invalid_argument("empty history");
  if (ridge_lambda < 0.0) throw std::invalid_argument("ridge_lambda < 0");
  const auto d = static_cast<Eigen::Index>(history.front().x.size());

  if (ridge_lambda > 0.0) {
    NormalAccumulator acc;
    acc.init(d);
    for (const auto& ex : history) acc.add(ex);
    return acc.solve(ridge_lambda);
  }

  // minimum-norm least squares needs the full design matrix
  const auto n = static_cast<Eigen::Index>(history.size());
  Eigen::MatrixXd phi(n, 3 * d);
  Eigen::VectorXd y(n);
  Eigen::VectorXd row(3 * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    stacked_row(history[static_cast<std::size_t>(i)], d, row);
    phi.row(i) = row;
    y(i) = history[static_cast<std::size_t>(i)].y;
  }
  const Eigen::VectorXd theta =
      phi.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
  ThetaModel model;
  model.theta1.assign(theta.data(), theta.data() + d);
  model.theta2.assign(theta.data() + d, theta.data() + 2 * d);
  model.theta3.assign(theta.data() + 2 * d, theta.data() + 3 * d);
  return model;
}

double predict(const ThetaModel& model, const std::vector<double>& x,
               double a) {
  if (model.theta1.size() != x.size() || model.theta2.size() != x.size() ||
      model.theta3.size() != x.size())
    throw std::invalid_argument("feature dimension mismatch");
  const double u = a - 1.0;
  double p = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    p += (model.theta1[j] + u * model.theta2[j] + u * u * model.theta3[j]) *
         x[j];
  return p;
}

std::vector<double> boosted_predictions(std::vector<double> predictions,
                                        std::size_t baseline_index,
                                        double boost) {
  if (boost < 0.0) throw std::invalid_argument("boost < 0");
  double& base = predictions.at(baseline_index);
  if (base >= 0.0)
    base *= 1.0 + boost;
  else
    base /= 1.0 + boost;
  return predictions;
}

std::size_t argmax_with_tiebreak(const std::vector<double>& values,
                                 std::size_t baseline_index) {
  const double best = *std::max_element(values.begin(), values.end());
  if (values.at(baseline_index) == best) return baseline_index;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] == best) return i;
  throw std::logic_error("unreachable");
}

std::vector<double> action_probabilities(const std::vector<double>& predictions,
                                         BanditConfig::Exploration exploration,
                                         double rho,
                                         std::size_t baseline_index,
                                         double baseline_boost) {
  for (double p : predictions)
    if (!std::isfinite(p)) throw std::invalid_argument("non-finite prediction");
  const std::vector<double> boosted =
      boosted_predictions(predictions, baseline_index, baseline_boost);
  const std::size_t n = boosted.size();
  const std::size_t best = argmax_with_tiebreak(boosted, baseline_index);
  std::vector<double> probs(n, 0.0);

  if (exploration == BanditConfig::Exploration::epsilon_greedy) {
    if (rho < 0.0 || rho > 1.0)
      throw std::invalid_argument("epsilon-greedy rho must be in [0,1]");
    for (std::size_t i = 0; i < n; ++i)
      probs[i] = rho / static_cast<double>(n);
    probs[best] += 1.0 - rho;
  } else {
    if (!(rho > 0.0)) throw std::invalid_argument("IGW rho must be > 0");
    double rest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == best) continue;
      probs[i] = 1.0 / (static_cast<double>(n) +
                        rho * (boosted[best] - boosted[i]));
      rest += probs[i];
    }
    probs[best] = 1.0 - rest;
  }
  return probs;
}

namespace {

struct PendingLabel {
  std::size_t product;
  long tau;
  std::vector<double> x;
  double a;
};

double effective_rho(const BanditConfig& cfg, long k) {
  if (!cfg.decay) return cfg.rho;
  const double root = std::sqrt(static_cast<double>(std::max(1L, k)));
  if (cfg.exploration == BanditConfig::Exploration::epsilon_greedy)
    return std::min(1.0, cfg.decay_c / root);
  return cfg.rho * root;
}

std::size_t sample_index(const std::vector<double>& probs, double u) {
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    c += probs[i];
    if (u < c) return i;
  }
  return probs.size() - 1;
}

}  // namespace

BanditRunResult run_bandit(const Policy& baseline,
                           const std::vector<TargetSchedule>& schedules,
                           const BanditConfig& bandit_config,
                           const std::vector<ProductConfig>& products,
                           std::uint64_t seed,
                           const BanditRunOptions& options) {
  return run_bandit(std::vector<Policy>(products.size(), baseline), schedules,
                    bandit_config, products, seed, options);
}

BanditRunResult run_bandit(const std::vector<Policy>& baselines,
                           const std::vector<TargetSchedule>& schedules,
                           const BanditConfig& bandit_config,
                           const std::vector<ProductConfig>& products,
                           std::uint64_t seed,
                           const BanditRunOptions& options) {
  bandit_config.validate();
  if (products.empty()) throw std::invalid_argument("no products");
  if (baselines.size() != products.size())
    throw std::invalid_argument("one baseline policy per product required");
  if (schedules.size() != products.size())
    throw std::invalid_argument("one schedule per product required");
  const long horizon = products.front().horizon;
  for (const auto& p : products) {
    p.validate();
    if (p.horizon != horizon)
      throw std::invalid_argument("products must share a horizon");
  }
  for (const auto& s : schedules) s.validate(bandit_config.H, horizon);

  const std::size_t n_products = products.size();
  const std::size_t n_actions = bandit_config.multipliers.size();
  const std::size_t base_idx = bandit_config.baseline_index();

  BanditRunResult result;
  result.history = options.initial_history;
  result.trajectories.assign(n_products, Trajectory{});

  std::vector<SimState> states;
  states.reserve(n_products);
  std::vector<double> discounts(n_products, 1.0);
  for (const auto& p : products) states.push_back(SimState::initial(p));

  std::optional<ThetaModel> model = options.initial_model;
  if (model)
    result.snapshots.push_back(ModelSnapshot{-1, *model});
  std::vector<PendingLabel> pending;
  long interventions = options.initial_intervention_count;

  const bool per_product = bandit_config.per_product_model;
  const bool fits_needed = !options.collect_only &&
                           bandit_config.ridge_lambda > 0.0;

  // Running normal equations; refitting at every scheduled week would
  // otherwise rescan the whole history each time.
  const Eigen::Index d = static_cast<Eigen::Index>(
      options.initial_history.empty()
          ? feature_dim(bandit_config.H)
          : options.initial_history.front().x.size());
  NormalAccumulator pooled;
  std::vector<NormalAccumulator> per_acc;
  std::vector<std::optional<ThetaModel>> per_model;
  std::map<long, std::size_t> product_index;
  if (fits_needed) {
    if (per_product) {
      per_acc.resize(n_products);
      per_model.assign(n_products, std::nullopt);
      for (std::size_t p = 0; p < n_products; ++p) {
        per_acc[p].init(d);
        product_index[products[p].id] = p;
      }
      for (const auto& ex : options.initial_history) {
        const auto it = product_index.find(ex.product);
        if (it != product_index.end()) per_acc[it->second].add(ex);
      }
    } else {
      pooled.init(d);
      for (const auto& ex : options.initial_history) pooled.add(ex);
    }
  }

  const auto append_label = [&](const PendingLabel& pl) {
    const double y = build_label(result.trajectories[pl.product], pl.tau,
                                 bandit_config.H, products[pl.product].gamma);
    const LabeledExample ex{pl.x, pl.a, y, products[pl.product].id};
    result.history.push_back(ex);
    if (fits_needed) {
      if (per_product)
        per_acc[pl.product].add(ex);
      else
        pooled.add(ex);
    }
  };

  for (long t = 0; t < horizon; ++t) {
    // Mature labels whose H-window closed before this week.
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->tau + bandit_config.H < t) {
        append_label(*it);
        it = pending.erase(it);
      } else {
        ++it;
      }
    }

    bool scheduled_this_week = false;
    for (std::size_t p = 0; p < n_products; ++p)
      if (schedules[p].contains(t)) scheduled_this_week = true;

    if (scheduled_this_week && !options.collect_only &&
        !result.history.empty() && !per_product) {
      if (bandit_config.ridge_lambda > 0.0)
        model = pooled.solve(bandit_config.ridge_lambda);
      else
        model = fit_model(result.history, bandit_config.ridge_lambda);
      result.snapshots.push_back(ModelSnapshot{t, *model});
    }

    for (std::size_t p = 0; p < n_products; ++p) {
      const auto& config = products[p];
      const long baseline_order = policy_action(baselines[p], states[p], config);
      long order = baseline_order;

      if (schedules[p].contains(t)) {
        const std::vector<double> x = build_features(
            config, states[p], result.trajectories[p].records,
            bandit_config.H);
        ++interventions;

        const ThetaModel* week_model = model ? &*model : nullptr;
        if (per_product && !options.collect_only) {
          if (fits_needed && per_acc[p].n > 0)
            per_model[p] = per_acc[p].solve(bandit_config.ridge_lambda);
          week_model = per_model[p] ? &*per_model[p] : nullptr;
        }

        std::vector<double> preds(n_actions, 0.0);
        std::vector<double> probs;
        if (options.collect_only) {
          probs.assign(n_actions, 1.0 / static_cast<double>(n_actions));
        } else {
          if (week_model)
            for (std::size_t a = 0; a < n_actions; ++a)
              preds[a] = predict(*week_model, x,
                                 bandit_config.multipliers[a]);
          preds = boosted_predictions(preds, base_idx,
                                      bandit_config.baseline_boost);
          probs = action_probabilities(
              preds, bandit_config.exploration,
              effective_rho(bandit_config, interventions), base_idx, 0.0);
        }

        const double u = draw_uniform(RngKey{
            seed, static_cast<std::uint64_t>(config.id),
            static_cast<std::uint64_t>(t), options.action_stream, 0});
        const std::size_t chosen = sample_index(probs, u);
        const double m = bandit_config.multipliers[chosen];
        order = std::max(
            0L, round_half_up(static_cast<double>(baseline_order) * m));

        pending.push_back(PendingLabel{p, t, x, m});
        result.action_log.push_back(
            ActionLogEntry{config.id, t, baseline_order, m, probs, preds});
      }

      PeriodRecord rec = step(states[p], order, config, seed);
      result.trajectories[p].total_discounted_reward += discounts[p] * rec.reward;
      discounts[p] *= config.gamma;
      result.trajectories[p].records.push_back(rec);
    }
  }

  // Every scheduled week satisfies tau + H < horizon, so all labels mature.
  for (const auto& pl : pending) append_label(pl);

  return result;
}

std::string action_log_csv(const std::vector<ActionLogEntry>& log,
                           const std::vector<double>& multipliers) {
  std::ostringstream os;
  os << "product_id,week,baseline_order,multiplier_sampled";
  for (double m : multipliers) os << ",p_" << m;
  for (double m : multipliers) os << ",pred_" << m;
  os << '\n';
  for (const auto& e : log) {
    os << e.product << ',' << e.week << ',' << e.baseline_order << ','
       << e.multiplier;
    for (double p : e.probabilities) os << ',' << p;
    for (double p : e.predictions) os << ',' << p;
    os << '\n';
  }
  return os.str();
}

std::string snapshots_text(const std::vector<ModelSnapshot>& snapshots) {
  std::ostringstream os;
  for (const auto& s : snapshots) {
    os << "week " << s.week << " dim " << s.model.theta1.size() << '\n';
    for (const auto* block : {&s.model.theta1, &s.model.theta2, &s.model.theta3}) {
      for (std::size_t j = 0; j < block->size(); ++j)
        os << (j ? " " : "") << (*block)[j];
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace invaudit
