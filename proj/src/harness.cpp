#include "invaudit/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace invaudit {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kTrainSalt = 0x7261696e5f736565ULL;
constexpr std::uint64_t kTestSalt = 0x746573745f736565ULL;
constexpr std::uint64_t kTuneSalt = 0x74756e655f736565ULL;

double gen_uniform(std::uint64_t seed, long product, long field, double lo,
                   double hi) {
  const double u = draw_uniform(RngKey{seed, static_cast<std::uint64_t>(product),
                                       static_cast<std::uint64_t>(field),
                                       Stream::product_gen, 0});
  return lo + (hi - lo) * u;
}

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& path, std::vector<std::string>& errors) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      errors.push_back(path + ": unknown key '" + it.key() + "'");
}

std::pair<double, double> parse_range(const nlohmann::json& v,
                                      const std::string& path,
                                      std::vector<std::string>& errors) {
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    double lo = v[0].get<double>(), hi = v[1].get<double>();
    if (lo > hi) errors.push_back(path + ": range lo > hi");
    return {lo, hi};
  }
  errors.push_back(path + ": expected a number or [lo, hi]");
  return {0.0, 0.0};
}

}  // namespace

std::vector<ProductConfig> ExperimentConfig::make_products() const {
  if (!explicit_products.empty()) return explicit_products;
  if (!generator) throw std::invalid_argument("no products configured");
  const auto& g = *generator;

  std::vector<ProductConfig> products;
  products.reserve(static_cast<std::size_t>(g.count));
  for (long i = 0; i < g.count; ++i) {
    ProductConfig p;
    p.id = i;
    p.price = gen_uniform(master_seed, i, 0, g.price_lo, g.price_hi);
    const double margin =
        gen_uniform(master_seed, i, 1, g.margin_lo, g.margin_hi);
    p.unit_cost = p.price * (1.0 - margin);
    p.holding_cost =
        p.price * gen_uniform(master_seed, i, 2, g.holding_lo, g.holding_hi);
    p.lost_sale_penalty =
        p.price * gen_uniform(master_seed, i, 3, g.penalty_lo, g.penalty_hi);
    p.gamma = g.gamma;
    p.l_max = g.l_max;
    p.demand.family = g.demand_family == "negative_binomial"
                          ? DemandModel::Family::negative_binomial
                          : DemandModel::Family::poisson;
    p.demand.base_rate =
        gen_uniform(master_seed, i, 4, g.base_rate_lo, g.base_rate_hi);
    p.demand.seasonal_amplitude = gen_uniform(
        master_seed, i, 5, g.seasonal_amplitude_lo, g.seasonal_amplitude_hi);
    p.demand.seasonal_period = g.seasonal_period;
    p.demand.trend = gen_uniform(master_seed, i, 6, g.trend_lo, g.trend_hi) *
                     p.demand.base_rate;
    p.demand.nb_dispersion = g.nb_dispersion;

    // Lead-time mass split across two adjacent lead times.
    const long mode = 1 + static_cast<long>(draw_below(
                              RngKey{master_seed, static_cast<std::uint64_t>(i),
                                     7, Stream::product_gen, 0},
                              static_cast<std::uint64_t>(
                                  std::max(1, g.l_max - 1))));
    p.vlt.pmf.assign(static_cast<std::size_t>(g.l_max), 0.0);
    p.vlt.pmf[static_cast<std::size_t>(mode - 1)] = 0.7;
    p.vlt.pmf[static_cast<std::size_t>(std::min<long>(mode, g.l_max - 1))] +=
        0.3;
    p.horizon = test_horizon;
    products.push_back(std::move(p));
  }
  return products;
}

ValidationResult validate_config(const std::string& raw_json) {
  ValidationResult result;
  auto& errors = result.errors;

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw_json);
  } catch (const std::exception& e) {
    errors.push_back(std::string("json parse error: ") + e.what());
    return result;
  }
  if (!j.is_object()) {
    errors.push_back("top level must be an object");
    return result;
  }

  ExperimentConfig cfg;
  check_keys(j,
             {"master_seed", "n_seeds", "train_horizon", "train_replicas",
              "test_horizon", "products", "policies", "bandit",
              "schedule_mode", "output_dir"},
             "config", errors);

  if (!j.contains("master_seed"))
    errors.push_back("config: master_seed is required (no wall-clock entropy)");
  else
    cfg.master_seed = j["master_seed"].get<std::uint64_t>();
  cfg.n_seeds = j.value("n_seeds", cfg.n_seeds);
  if (cfg.n_seeds < 1) errors.push_back("n_seeds: must be >= 1");
  cfg.train_horizon = j.value("train_horizon", cfg.train_horizon);
  cfg.train_replicas = j.value("train_replicas", cfg.train_replicas);
  cfg.test_horizon = j.value("test_horizon", cfg.test_horizon);
  if (cfg.train_horizon < 1) errors.push_back("train_horizon: must be >= 1");
  if (cfg.train_replicas < 0) errors.push_back("train_replicas: must be >= 0");
  if (cfg.test_horizon < 1) errors.push_back("test_horizon: must be >= 1");
  cfg.output_dir = j.value("output_dir", cfg.output_dir);

  if (j.contains("bandit")) {
    const auto& b = j["bandit"];
    check_keys(b,
               {"H", "rho", "exploration", "multipliers", "baseline_boost",
                "ridge_lambda", "decay", "decay_c", "per_product_model"},
               "bandit", errors);
    cfg.bandit.H = b.value("H", cfg.bandit.H);
    cfg.bandit.rho = b.value("rho", cfg.bandit.rho);
    cfg.bandit.baseline_boost =
        b.value("baseline_boost", cfg.bandit.baseline_boost);
    cfg.bandit.ridge_lambda = b.value("ridge_lambda", cfg.bandit.ridge_lambda);
    cfg.bandit.decay = b.value("decay", cfg.bandit.decay);
    cfg.bandit.decay_c = b.value("decay_c", cfg.bandit.decay_c);
    cfg.bandit.per_product_model =
        b.value("per_product_model", cfg.bandit.per_product_model);
    if (b.contains("multipliers"))
      cfg.bandit.multipliers = b["multipliers"].get<std::vector<double>>();
    const std::string ex = b.value("exploration", "epsilon_greedy");
    if (ex == "epsilon_greedy")
      cfg.bandit.exploration = BanditConfig::Exploration::epsilon_greedy;
    else if (ex == "inverse_gap_weighting")
      cfg.bandit.exploration = BanditConfig::Exploration::inverse_gap_weighting;
    else
      errors.push_back("bandit.exploration: unknown scheme '" + ex + "'");
  }
  try {
    cfg.bandit.validate();
  } catch (const std::exception& e) {
    errors.push_back(std::string("bandit: ") + e.what());
  }

  if (j.contains("schedule_mode")) {
    const auto& s = j["schedule_mode"];
    if (s.is_string()) {
      cfg.schedule_mode = s.get<std::string>();
      if (cfg.schedule_mode != "per_product_random_week")
        errors.push_back("schedule_mode: unknown mode '" + cfg.schedule_mode +
                         "'");
    } else if (s.is_array()) {
      cfg.schedule_mode = "explicit";
      cfg.explicit_schedule = s.get<std::vector<long>>();
      for (std::size_t i = 0; i + 1 < cfg.explicit_schedule.size(); ++i)
        if (cfg.explicit_schedule[i + 1] - cfg.explicit_schedule[i] <
            cfg.bandit.H)
          errors.push_back(
              "schedule_mode: weeks " +
              std::to_string(cfg.explicit_schedule[i]) + " and " +
              std::to_string(cfg.explicit_schedule[i + 1]) +
              " violate the H-gap rule");
      for (long t : cfg.explicit_schedule)
        if (t < 0 || t + cfg.bandit.H >= cfg.test_horizon)
          errors.push_back("schedule_mode: week " + std::to_string(t) +
                           " leaves no room for an H-step label");
    } else {
      errors.push_back("schedule_mode: expected a string or array of weeks");
    }
  }

  if (!j.contains("products")) {
    errors.push_back("config: products is required");
  } else if (j["products"].is_object()) {
    const auto& g = j["products"];
    check_keys(g,
               {"count", "price", "margin", "holding", "penalty", "base_rate",
                "seasonal_amplitude", "seasonal_period", "trend", "l_max",
                "gamma", "demand_family", "nb_dispersion"},
               "products", errors);
    ProductGeneratorSpec spec;
    spec.count = g.value("count", spec.count);
    if (spec.count < 1) errors.push_back("products.count: must be >= 1");
    if (g.contains("price"))
      std::tie(spec.price_lo, spec.price_hi) =
          parse_range(g["price"], "products.price", errors);
    if (g.contains("margin"))
      std::tie(spec.margin_lo, spec.margin_hi) =
          parse_range(g["margin"], "products.margin", errors);
    if (g.contains("holding"))
      std::tie(spec.holding_lo, spec.holding_hi) =
          parse_range(g["holding"], "products.holding", errors);
    if (g.contains("penalty"))
      std::tie(spec.penalty_lo, spec.penalty_hi) =
          parse_range(g["penalty"], "products.penalty", errors);
    if (g.contains("base_rate"))
      std::tie(spec.base_rate_lo, spec.base_rate_hi) =
          parse_range(g["base_rate"], "products.base_rate", errors);
    if (g.contains("seasonal_amplitude"))
      std::tie(spec.seasonal_amplitude_lo, spec.seasonal_amplitude_hi) =
          parse_range(g["seasonal_amplitude"], "products.seasonal_amplitude",
                      errors);
    if (g.contains("trend"))
      std::tie(spec.trend_lo, spec.trend_hi) =
          parse_range(g["trend"], "products.trend", errors);
    spec.seasonal_period = g.value("seasonal_period", spec.seasonal_period);
    spec.l_max = g.value("l_max", spec.l_max);
    spec.gamma = g.value("gamma", spec.gamma);
    spec.demand_family = g.value("demand_family", spec.demand_family);
    spec.nb_dispersion = g.value("nb_dispersion", spec.nb_dispersion);
    if (spec.demand_family != "poisson" &&
        spec.demand_family != "negative_binomial")
      errors.push_back("products.demand_family: unknown family '" +
                       spec.demand_family + "'");
    if (!(spec.gamma > 0.0) || spec.gamma > 1.0)
      errors.push_back("products.gamma: must be in (0, 1]");
    if (spec.margin_lo <= 0.0 || spec.margin_hi >= 1.0)
      errors.push_back("products.margin: must stay within (0, 1)");
    if (spec.l_max < 2) errors.push_back("products.l_max: must be >= 2");
    cfg.generator = spec;
  } else if (j["products"].is_array()) {
    long next_id = 0;
    for (const auto& pj : j["products"]) {
      const std::string path = "products[" + std::to_string(next_id) + "]";
      check_keys(pj,
                 {"price", "unit_cost", "holding_cost", "lost_sale_penalty",
                  "gamma", "l_max", "demand", "vlt"},
                 path, errors);
      ProductConfig p;
      p.id = next_id++;
      p.price = pj.value("price", p.price);
      p.unit_cost = pj.value("unit_cost", p.unit_cost);
      p.holding_cost = pj.value("holding_cost", p.holding_cost);
      p.lost_sale_penalty = pj.value("lost_sale_penalty", p.lost_sale_penalty);
      p.gamma = pj.value("gamma", p.gamma);
      p.l_max = pj.value("l_max", p.l_max);
      if (pj.contains("demand")) {
        const auto& dj = pj["demand"];
        check_keys(dj,
                   {"family", "base_rate", "seasonal_amplitude",
                    "seasonal_period", "trend", "nb_dispersion"},
                   path + ".demand", errors);
        const std::string fam = dj.value("family", "poisson");
        if (fam == "negative_binomial")
          p.demand.family = DemandModel::Family::negative_binomial;
        else if (fam != "poisson")
          errors.push_back(path + ".demand.family: unknown family '" + fam +
                           "'");
        p.demand.base_rate = dj.value("base_rate", p.demand.base_rate);
        p.demand.seasonal_amplitude =
            dj.value("seasonal_amplitude", p.demand.seasonal_amplitude);
        p.demand.seasonal_period =
            dj.value("seasonal_period", p.demand.seasonal_period);
        p.demand.trend = dj.value("trend", p.demand.trend);
        p.demand.nb_dispersion =
            dj.value("nb_dispersion", p.demand.nb_dispersion);
      }
      if (pj.contains("vlt")) {
        if (pj["vlt"].is_object() && pj["vlt"].contains("pmf"))
          p.vlt.pmf = pj["vlt"]["pmf"].get<std::vector<double>>();
        else
          errors.push_back(path + ".vlt: expected {\"pmf\": [...]}");
      } else {
        p.vlt = VltModel::deterministic(2, p.l_max);
      }
      p.horizon = cfg.test_horizon;
      try {
        p.validate();
      } catch (const std::exception& e) {
        errors.push_back(path + ": " + e.what());
      }
      cfg.explicit_products.push_back(std::move(p));
    }
    if (cfg.explicit_products.empty())
      errors.push_back("products: must not be empty");
  } else {
    errors.push_back("products: expected a generator object or an array");
  }

  if (!j.contains("policies") || !j["policies"].is_array() ||
      j["policies"].empty()) {
    errors.push_back("config: a nonempty policies array is required");
  } else {
    std::size_t idx = 0;
    for (const auto& pj : j["policies"]) {
      const std::string path = "policies[" + std::to_string(idx++) + "]";
      check_keys(pj,
                 {"name", "kind", "quantile", "level", "scale", "scale_mode"},
                 path, errors);
      PolicySpec spec;
      spec.kind = pj.value("kind", "");
      spec.name = pj.value("name", spec.kind);
      spec.quantile = pj.value("quantile", 0.0);
      spec.base_stock_level = pj.value("level", 0L);
      spec.scale = pj.value("scale", 1.0);
      spec.scale_mode = pj.value("scale_mode", "target");
      if (spec.kind != "newsvendor" && spec.kind != "base_stock" &&
          spec.kind != "tuned_base_stock")
        errors.push_back(path + ".kind: unknown policy kind '" + spec.kind +
                         "'");
      if (spec.quantile != 0.0 &&
          (spec.quantile <= 0.0 || spec.quantile >= 1.0))
        errors.push_back(path + ".quantile: must be in (0, 1)");
      if (!(spec.scale > 0.0)) errors.push_back(path + ".scale: must be > 0");
      if (spec.scale_mode != "target" && spec.scale_mode != "order")
        errors.push_back(path + ".scale_mode: must be 'target' or 'order'");
      if (spec.base_stock_level < 0)
        errors.push_back(path + ".level: must be >= 0");
      cfg.policies.push_back(std::move(spec));
    }
  }

  if (cfg.test_horizon <= cfg.bandit.H)
    errors.push_back("test_horizon: must exceed bandit.H");
  else if (cfg.schedule_mode == "per_product_random_week" &&
           cfg.test_horizon < 2 * cfg.bandit.H + 1)
    errors.push_back(
        "test_horizon: random-week scheduling needs test_horizon > 2*H "
        "(H-week burn-in plus room for the label window)");

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

std::string config_echo_json(const ExperimentConfig& config) {
  ordered_json j;
  j["master_seed"] = config.master_seed;
  j["n_seeds"] = config.n_seeds;
  j["train_horizon"] = config.train_horizon;
  j["train_replicas"] = config.train_replicas;
  j["test_horizon"] = config.test_horizon;
  if (config.generator) {
    const auto& g = *config.generator;
    j["products"] = ordered_json{
        {"count", g.count},
        {"price", {g.price_lo, g.price_hi}},
        {"margin", {g.margin_lo, g.margin_hi}},
        {"holding", {g.holding_lo, g.holding_hi}},
        {"penalty", {g.penalty_lo, g.penalty_hi}},
        {"base_rate", {g.base_rate_lo, g.base_rate_hi}},
        {"seasonal_amplitude",
         {g.seasonal_amplitude_lo, g.seasonal_amplitude_hi}},
        {"seasonal_period", g.seasonal_period},
        {"trend", {g.trend_lo, g.trend_hi}},
        {"l_max", g.l_max},
        {"gamma", g.gamma},
        {"demand_family", g.demand_family},
        {"nb_dispersion", g.nb_dispersion}};
  } else {
    j["products"] = ordered_json{{"explicit_count",
                                  config.explicit_products.size()}};
  }
  ordered_json pols = ordered_json::array();
  for (const auto& p : config.policies)
    pols.push_back(ordered_json{{"name", p.name},
                                {"kind", p.kind},
                                {"quantile", p.quantile},
                                {"level", p.base_stock_level},
                                {"scale", p.scale},
                                {"scale_mode", p.scale_mode}});
  j["policies"] = pols;
  j["bandit"] = ordered_json{
      {"H", config.bandit.H},
      {"rho", config.bandit.rho},
      {"exploration",
       config.bandit.exploration == BanditConfig::Exploration::epsilon_greedy
           ? "epsilon_greedy"
           : "inverse_gap_weighting"},
      {"multipliers", config.bandit.multipliers},
      {"baseline_boost", config.bandit.baseline_boost},
      {"ridge_lambda", config.bandit.ridge_lambda},
      {"decay", config.bandit.decay},
      {"decay_c", config.bandit.decay_c},
      {"per_product_model", config.bandit.per_product_model}};
  if (config.schedule_mode == "explicit")
    j["schedule_mode"] = config.explicit_schedule;
  else
    j["schedule_mode"] = config.schedule_mode;
  j["output_dir"] = config.output_dir;
  return j.dump(2);
}

std::vector<Policy> resolve_policy(const PolicySpec& spec,
                                   const std::vector<ProductConfig>& products,
                                   long train_horizon,
                                   std::uint64_t master_seed, bool parallel) {
  std::vector<Policy> policies(products.size());

  auto wrap = [&spec](Policy p) {
    if (spec.scale == 1.0) return p;
    return Policy::scaled(std::move(p), spec.scale,
                          spec.scale_mode == "order"
                              ? Policy::ScaleMode::order
                              : Policy::ScaleMode::target);
  };

  if (spec.kind == "newsvendor") {
    std::fill(policies.begin(), policies.end(),
              wrap(Policy::newsvendor(spec.quantile)));
  } else if (spec.kind == "base_stock") {
    std::fill(policies.begin(), policies.end(),
              wrap(Policy::base_stock(spec.base_stock_level)));
  } else if (spec.kind == "tuned_base_stock") {
    const auto n = static_cast<long>(products.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long i = 0; i < n; ++i) {
      ProductConfig cfg = products[static_cast<std::size_t>(i)];
      cfg.horizon = train_horizon;
      const long anchor = newsvendor_target(SimState::initial(cfg), cfg,
                                            default_quantile(cfg));
      std::vector<long> grid;
      for (double f = 0.5; f <= 2.01; f += 0.125)
        grid.push_back(round_half_up(static_cast<double>(anchor) * f));
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      const std::uint64_t seed_base = detail::splitmix64(
          master_seed ^ kTuneSalt ^ static_cast<std::uint64_t>(cfg.id));
      policies[static_cast<std::size_t>(i)] =
          wrap(tune_base_stock(cfg, grid, 3, seed_base));
    }
  } else {
    throw std::invalid_argument("unknown policy kind: " + spec.kind);
  }
  return policies;
}

std::vector<OracleResult> cohort_oracle(
    const std::vector<Policy>& policies,
    const std::vector<ProductConfig>& products,
    const std::vector<long>& weeks, std::uint64_t seed,
    const std::vector<double>& multipliers, bool parallel) {
  if (policies.size() != products.size() || weeks.size() != products.size())
    throw std::invalid_argument("cohort inputs must align");
  std::vector<OracleResult> results(products.size());
  const auto n = static_cast<long>(products.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    PolicySource source(policies[idx]);
    results[idx] =
        oracle_best(source, products[idx], seed, weeks[idx], multipliers);
  }
  return results;
}

ExperimentArtifacts run_experiment(const ExperimentConfig& config,
                                   bool parallel) {
  const std::vector<ProductConfig> base_products = config.make_products();
  const std::size_t n_products = base_products.size();
  const std::size_t base_idx = config.bandit.baseline_index();
  const int H = config.bandit.H;

  std::vector<ProductConfig> train_products = base_products;
  for (auto& p : train_products) p.horizon = config.train_horizon;
  std::vector<ProductConfig> test_products = base_products;
  for (auto& p : test_products) p.horizon = config.test_horizon;

  // Training schedule: every H weeks, leaving room for the label window.
  TargetSchedule train_schedule;
  for (long t = H; t + H < config.train_horizon; t += std::max(1, H))
    train_schedule.times.push_back(t);
  const std::vector<TargetSchedule> train_schedules(n_products,
                                                    train_schedule);

  ExperimentArtifacts artifacts;

  for (const auto& spec : config.policies) {
    const std::vector<Policy> policies = resolve_policy(
        spec, base_products, config.train_horizon, config.master_seed,
        parallel);

    // Phase 1: collect labels under uniformly random multipliers.
    std::vector<LabeledExample> history;
    for (int r = 0; r < config.train_replicas; ++r) {
      const std::uint64_t seed = detail::splitmix64(
          config.master_seed ^ kTrainSalt ^ static_cast<std::uint64_t>(r));
      BanditRunOptions opts;
      opts.collect_only = true;
      opts.action_stream = Stream::train_action;
      auto res = run_bandit(policies, train_schedules, config.bandit,
                            train_products, seed, opts);
      history.insert(history.end(), res.history.begin(), res.history.end());
    }
    std::optional<ThetaModel> warm;
    if (!history.empty() && !config.bandit.per_product_model)
      warm = fit_model(history, config.bandit.ridge_lambda);

    // Phase 2: greedy-with-exploration bandit on fresh seeds.
    PolicyArtifacts pa;
    for (int s = 0; s < config.n_seeds; ++s) {
      std::vector<TargetSchedule> schedules(n_products);
      std::vector<long> weeks(n_products, -1);
      bool any_week = false;
      if (config.schedule_mode == "explicit") {
        for (auto& sch : schedules) sch.times = config.explicit_schedule;
        if (config.explicit_schedule.size() == 1) {
          std::fill(weeks.begin(), weeks.end(), config.explicit_schedule[0]);
          any_week = true;
        } else {
          any_week = !config.explicit_schedule.empty();
        }
      } else {
        // Burn in H weeks so the dynamic features carry a full history,
        // matching the support the warm-start model was trained on.
        const long span = config.test_horizon - 2 * H;  // weeks H .. T-H-1
        for (std::size_t p = 0; p < n_products; ++p) {
          const long tau =
              H + static_cast<long>(draw_below(
                      RngKey{config.master_seed, static_cast<std::uint64_t>(p),
                             static_cast<std::uint64_t>(s), Stream::schedule,
                             0},
                      static_cast<std::uint64_t>(span)));
          schedules[p].times = {tau};
          weeks[p] = tau;
        }
        any_week = true;
      }

      const std::uint64_t test_seed = detail::splitmix64(
          config.master_seed ^ kTestSalt ^ static_cast<std::uint64_t>(s));
      BanditRunOptions opts;
      opts.initial_history = history;
      opts.initial_model = warm;
      opts.initial_intervention_count = static_cast<long>(history.size());
      auto res = run_bandit(policies, schedules, config.bandit, test_products,
                            test_seed, opts);

      pa.action_log.insert(pa.action_log.end(), res.action_log.begin(),
                           res.action_log.end());
      if (s == config.n_seeds - 1) pa.snapshots = res.snapshots;

      if (any_week && weeks[0] >= 0) {
        const auto oracle = cohort_oracle(policies, test_products, weeks,
                                          test_seed, config.bandit.multipliers,
                                          parallel);
        for (std::size_t p = 0; p < n_products; ++p) {
          pa.bandit_rewards.push_back(
              res.trajectories[p].total_discounted_reward);
          pa.baseline_rewards.push_back(oracle[p].rewards[base_idx]);
          pa.oracle_rewards.push_back(oracle[p].best_reward);
        }
      } else {
        // No single intervention week per product: shares only, no delta_I.
        for (std::size_t p = 0; p < n_products; ++p) {
          const double r = res.trajectories[p].total_discounted_reward;
          pa.bandit_rewards.push_back(r);
          pa.baseline_rewards.push_back(r);
          pa.oracle_rewards.push_back(r);
        }
      }
    }

    pa.report = build_report(spec.name, pa.action_log, pa.bandit_rewards,
                             pa.baseline_rewards, pa.oracle_rewards);
    artifacts.per_policy.push_back(std::move(pa));
  }

  std::vector<AuditReport> reports;
  for (const auto& pa : artifacts.per_policy) reports.push_back(pa.report);
  artifacts.table_text = report_table(reports);

  ordered_json out;
  out["config"] = ordered_json::parse(config_echo_json(config));
  ordered_json rows = ordered_json::array();
  for (const auto& pa : artifacts.per_policy) {
    ordered_json row;
    row["policy"] = pa.report.policy_name;
    row["shares"] = ordered_json{{"down", pa.report.share_down},
                                 {"same", pa.report.share_same},
                                 {"up", pa.report.share_up}};
    if (pa.report.delta_i) {
      row["delta_i"] = *pa.report.delta_i;
      row["delta_i_percent"] = 100.0 * *pa.report.delta_i;
    } else {
      row["delta_i"] = nullptr;
    }
    if (pa.report.epsilon_hat)
      row["epsilon_hat"] = *pa.report.epsilon_hat;
    else
      row["epsilon_hat"] = nullptr;
    row["n_products"] = pa.report.n_products;
    rows.push_back(std::move(row));
  }
  out["reports"] = rows;
  artifacts.machine_json = out.dump(2) + "\n";
  return artifacts;
}

void write_artifacts(const ExperimentConfig& config,
                     const ExperimentArtifacts& artifacts) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const fs::path dir(config.output_dir);

  std::ofstream(dir / "report.txt") << artifacts.table_text;
  std::ofstream(dir / "report.json") << artifacts.machine_json;
  for (std::size_t i = 0; i < artifacts.per_policy.size(); ++i) {
    const auto& pa = artifacts.per_policy[i];
    const std::string name = config.policies[i].name;
    std::ofstream(dir / ("action_log_" + name + ".csv"))
        << action_log_csv(pa.action_log, config.bandit.multipliers);
    std::ofstream(dir / ("snapshots_" + name + ".txt"))
        << snapshots_text(pa.snapshots);
  }
}

}  // namespace invaudit
