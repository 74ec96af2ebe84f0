#include <doctest.h>

#include <cmath>
#include <numeric>

#include "invaudit/bandit.hpp"

using namespace invaudit;

namespace {

ProductConfig small_config() {
  ProductConfig cfg;
  cfg.price = 10.0;
  cfg.unit_cost = 4.0;
  cfg.holding_cost = 0.5;
  cfg.lost_sale_penalty = 2.0;
  cfg.gamma = 0.999;
  cfg.demand.base_rate = 8.0;
  cfg.l_max = 4;
  cfg.vlt = VltModel::deterministic(2, cfg.l_max);
  cfg.horizon = 52;
  return cfg;
}

std::vector<double> synth_features(std::uint64_t i, int d) {
  std::vector<double> x;
  for (int j = 0; j + 1 < d; ++j)
    x.push_back(2.0 * draw_uniform(RngKey{i, static_cast<std::uint64_t>(j), 0,
                                          Stream::tuning, 0}) -
                1.0);
  x.push_back(1.0);
  return x;
}

double planted_predict(const std::vector<double>& t1,
                       const std::vector<double>& t2,
                       const std::vector<double>& t3,
                       const std::vector<double>& x, double a) {
  double p = 0.0;
  const double u = a - 1.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    p += (t1[j] + u * t2[j] + u * u * t3[j]) * x[j];
  return p;
}

}  // namespace

TEST_CASE("schedule gaps below H are rejected") {
  TargetSchedule s{{5, 10}};
  CHECK_THROWS_AS(s.validate(12, 52), std::invalid_argument);
  TargetSchedule ok{{5, 17, 29}};
  CHECK_NOTHROW(ok.validate(12, 52));
  TargetSchedule late{{45}};
  CHECK_THROWS_AS(late.validate(12, 52), std::invalid_argument);
}

TEST_CASE("build_label: H=0 returns the single reward") {
  Trajectory traj;
  for (long t = 0; t < 5; ++t) {
    PeriodRecord rec;
    rec.t = t;
    rec.reward = static_cast<double>(t + 1);
    traj.records.push_back(rec);
  }
  CHECK(build_label(traj, 2, 0, 0.9) == doctest::Approx(3.0));
}

TEST_CASE("build_label: gamma 1 and equal rewards gives (H+1)r") {
  Trajectory traj;
  for (long t = 0; t < 10; ++t) {
    PeriodRecord rec;
    rec.t = t;
    rec.reward = 2.5;
    traj.records.push_back(rec);
  }
  CHECK(build_label(traj, 1, 4, 1.0) == doctest::Approx(5.0 * 2.5));
}

TEST_CASE("build_label: worked discounting example") {
  Trajectory traj;
  for (double r : {1.0, 2.0, 3.0}) {
    PeriodRecord rec;
    rec.reward = r;
    traj.records.push_back(rec);
  }
  CHECK(build_label(traj, 0, 2, 0.9) == doctest::Approx(5.23));
}

TEST_CASE("build_label rejects windows past the horizon") {
  Trajectory traj;
  traj.records.push_back(PeriodRecord{});
  CHECK_THROWS_AS(build_label(traj, 0, 3, 1.0), std::invalid_argument);
}

TEST_CASE("fit_model recovers a planted model exactly from clean data") {
  const int d = 6;
  std::vector<double> t1(d), t2(d), t3(d);
  for (int j = 0; j < d; ++j) {
    t1[j] = std::sin(static_cast<double>(j) + 1.0);
    t2[j] = std::cos(2.0 * j) * 0.5;
    t3[j] = 0.3 * j - 0.7;
  }
  const std::vector<double> actions = {0.8, 1.0, 1.2};
  std::vector<LabeledExample> history;
  for (std::uint64_t i = 0; i < 4 * 3 * d; ++i) {
    LabeledExample ex;
    ex.x = synth_features(i, d);
    ex.a = actions[i % 3];
    ex.y = planted_predict(t1, t2, t3, ex.x, ex.a);
    history.push_back(ex);
  }
  const ThetaModel model = fit_model(history, 0.0);
  for (int j = 0; j < d; ++j) {
    CHECK(std::abs(model.theta1[j] - t1[j]) < 1e-6);
    CHECK(std::abs(model.theta2[j] - t2[j]) < 1e-6);
    CHECK(std::abs(model.theta3[j] - t3[j]) < 1e-6);
  }
}

TEST_CASE("ridge shrinks a single scalar example by the closed form") {
  // one example, d=1, x=2, a=1, y=3: theta1 = x*y / (x^2 + lambda)
  LabeledExample ex{{2.0}, 1.0, 3.0};
  const double lambda = 0.5;
  const ThetaModel model = fit_model({ex}, lambda);
  CHECK(model.theta1[0] == doctest::Approx(2.0 * 3.0 / (4.0 + lambda)));
  CHECK(predict(model, {2.0}, 1.0) < 3.0);  // shrunk toward zero
}

TEST_CASE("all-zero labels fit to the zero model under ridge") {
  std::vector<LabeledExample> history;
  for (std::uint64_t i = 0; i < 20; ++i)
    history.push_back(LabeledExample{synth_features(i, 4), 1.2, 0.0});
  const ThetaModel model = fit_model(history, 1.0);
  for (double v : model.theta1) CHECK(std::abs(v) < 1e-12);
  for (double v : model.theta2) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("fit_model rejects non-finite labels") {
  std::vector<LabeledExample> history{{{1.0}, 1.0, std::nan("")}};
  CHECK_THROWS_AS(fit_model(history, 1.0), std::invalid_argument);
}

TEST_CASE("predict at the baseline multiplier ignores theta2 and theta3") {
  ThetaModel model{{1.0, 2.0}, {100.0, -5.0}, {7.0, 7.0}};
  const std::vector<double> x = {0.5, 2.0};
  CHECK(predict(model, x, 1.0) == doctest::Approx(0.5 + 4.0));
}

TEST_CASE("predict with zero action terms is action-independent") {
  ThetaModel model{{1.0, 2.0}, {0.0, 0.0}, {0.0, 0.0}};
  const std::vector<double> x = {0.5, 2.0};
  CHECK(predict(model, x, 0.8) == predict(model, x, 1.2));
}

TEST_CASE("predict: worked quadratic example") {
  // theta1^T x = 1, theta2^T x = 2, theta3^T x = 3, a = 1.2
  ThetaModel model{{1.0}, {2.0}, {3.0}};
  CHECK(predict(model, {1.0}, 1.2) == doctest::Approx(1.52));
}

TEST_CASE("predict rejects dimension mismatch") {
  ThetaModel model{{1.0}, {1.0}, {1.0}};
  CHECK_THROWS_AS(predict(model, {1.0, 2.0}, 1.0), std::invalid_argument);
}

TEST_CASE("epsilon-greedy: equal predictions tie-break to the baseline") {
  const auto probs = action_probabilities(
      {5.0, 5.0, 5.0}, BanditConfig::Exploration::epsilon_greedy, 0.0, 1, 0.0);
  CHECK(probs[0] == 0.0);
  CHECK(probs[1] == 1.0);
  CHECK(probs[2] == 0.0);
}

TEST_CASE("epsilon-greedy: worked example (0.1, 0.1, 0.8)") {
  const auto probs = action_probabilities(
      {1.0, 2.0, 3.0}, BanditConfig::Exploration::epsilon_greedy, 0.3, 1, 0.0);
  CHECK(probs[0] == doctest::Approx(0.1));
  CHECK(probs[1] == doctest::Approx(0.1));
  CHECK(probs[2] == doctest::Approx(0.8));
}

TEST_CASE("inverse gap weighting: worked 1/13 example") {
  const auto probs = action_probabilities(
      {0.0, 0.0, 1.0}, BanditConfig::Exploration::inverse_gap_weighting, 10.0,
      1, 0.0);
  CHECK(probs[0] == doctest::Approx(1.0 / 13.0));
  CHECK(probs[1] == doctest::Approx(1.0 / 13.0));
  CHECK(probs[2] == doctest::Approx(11.0 / 13.0));
  CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("invalid exploration parameters are rejected") {
  CHECK_THROWS_AS(
      action_probabilities({1.0, 2.0, 3.0},
                           BanditConfig::Exploration::epsilon_greedy, 1.5, 1,
                           0.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      action_probabilities({1.0, 2.0, 3.0},
                           BanditConfig::Exploration::inverse_gap_weighting,
                           0.0, 1, 0.0),
      std::invalid_argument);
}

TEST_CASE("probabilities are valid distributions on random inputs") {
  for (std::uint64_t i = 0; i < 500; ++i) {
    std::vector<double> preds;
    for (int a = 0; a < 3; ++a)
      preds.push_back(200.0 * draw_uniform(RngKey{i,
                                                  static_cast<std::uint64_t>(a),
                                                  0, Stream::tuning, 0}) -
                      100.0);
    const double rho =
        draw_uniform(RngKey{i, 9, 0, Stream::tuning, 0});
    for (auto ex : {BanditConfig::Exploration::epsilon_greedy,
                    BanditConfig::Exploration::inverse_gap_weighting}) {
      const double r =
          ex == BanditConfig::Exploration::inverse_gap_weighting
              ? 10.0 * rho + 0.01
              : rho;
      const auto probs = action_probabilities(preds, ex, r, 1, 0.1);
      double sum = 0.0;
      for (double p : probs) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("baseline boost never lowers the baseline probability") {
  const std::vector<double> preds = {10.0, 9.0, 11.0};
  double prev = -1.0;
  for (double boost : {0.0, 0.05, 0.1, 0.2, 0.5}) {
    const auto probs = action_probabilities(
        preds, BanditConfig::Exploration::epsilon_greedy, 0.2, 1, boost);
    CHECK(probs[1] >= prev);
    prev = probs[1];
  }
  // boost on a negative baseline divides instead of multiplying
  const auto neg = boosted_predictions({-10.0, -5.0, -20.0}, 0, 0.5);
  CHECK(neg[0] == doctest::Approx(-10.0 / 1.5));
}

TEST_CASE("run_bandit with an empty schedule reproduces the baseline") {
  ProductConfig cfg = small_config();
  BanditConfig bc;
  const Policy baseline = Policy::newsvendor();
  auto res = run_bandit(baseline, {TargetSchedule{}}, bc, {cfg}, 31);
  PolicySource src(baseline);
  const Trajectory pure = simulate(src, cfg, 31);
  REQUIRE(res.trajectories.size() == 1);
  REQUIRE(res.trajectories[0].records.size() == pure.records.size());
  for (std::size_t t = 0; t < pure.records.size(); ++t) {
    CHECK(res.trajectories[0].records[t].order == pure.records[t].order);
    CHECK(res.trajectories[0].records[t].reward == pure.records[t].reward);
  }
  CHECK(res.action_log.empty());
  CHECK(res.history.empty());
}

TEST_CASE("run_bandit with no history plays the baseline multiplier") {
  // empty model -> flat predictions -> tie-break to 1.0; rho 0 keeps it
  ProductConfig cfg = small_config();
  BanditConfig bc;
  bc.rho = 0.0;
  bc.decay = false;
  const Policy baseline = Policy::newsvendor();
  auto res = run_bandit(baseline, {TargetSchedule{{20}}}, bc, {cfg}, 31);
  REQUIRE(res.action_log.size() == 1);
  CHECK(res.action_log[0].multiplier == 1.0);
  PolicySource src(baseline);
  const Trajectory pure = simulate(src, cfg, 31);
  CHECK(res.trajectories[0].total_discounted_reward ==
        doctest::Approx(pure.total_discounted_reward));
}

TEST_CASE("off-schedule weeks always play the baseline action") {
  ProductConfig cfg = small_config();
  BanditConfig bc;
  bc.decay = false;
  bc.rho = 1.0;  // force exploration on the scheduled week
  const Policy baseline = Policy::scaled(Policy::newsvendor(), 0.5);
  auto res = run_bandit(baseline, {TargetSchedule{{10, 30}}}, bc, {cfg}, 7);
  PolicySource src(baseline);
  const Trajectory pure = simulate(src, cfg, 7, {{10, 1.0}, {30, 1.0}});
  // weeks before the first intervention are bit-identical
  for (std::size_t t = 0; t < 10; ++t)
    CHECK(res.trajectories[0].records[t].order == pure.records[t].order);
}

TEST_CASE("stored labels reconstruct from the trajectory that produced them") {
  ProductConfig cfg = small_config();
  BanditConfig bc;
  bc.H = 6;
  bc.decay = false;
  bc.rho = 1.0;
  const Policy baseline = Policy::newsvendor();
  auto res =
      run_bandit(baseline, {TargetSchedule{{5, 15, 25, 35}}}, bc, {cfg}, 13);
  REQUIRE(res.history.size() == 4);
  const std::vector<long> taus = {5, 15, 25, 35};
  for (std::size_t i = 0; i < 4; ++i) {
    const double y =
        build_label(res.trajectories[0], taus[i], bc.H, cfg.gamma);
    CHECK(res.history[i].y == doctest::Approx(y).epsilon(1e-6));
  }
}

TEST_CASE("feature vectors have fixed dimension and finite entries") {
  ProductConfig cfg = small_config();
  const int H = 12;
  SimState state = SimState::initial(cfg);
  std::vector<PeriodRecord> none;
  const auto x0 = build_features(cfg, state, none, H);
  CHECK(static_cast<int>(x0.size()) == feature_dim(H));
  CHECK(x0.back() == 1.0);

  std::vector<PeriodRecord> some(3);
  some[2].demand = 9;
  some[2].order = 4;
  const auto x1 = build_features(cfg, state, some, H);
  CHECK(x1.size() == x0.size());
  CHECK(x1[6] == 9.0);               // most recent demand first
  CHECK(x1[6 + H] == 4.0);           // most recent order first
  for (double v : x1) CHECK(std::isfinite(v));
}

TEST_CASE("mid-run refits equal a fresh fit of the matured history") {
  ProductConfig cfg = small_config();
  cfg.horizon = 52;
  BanditConfig bc;
  bc.H = 6;
  const std::vector<TargetSchedule> schedules{TargetSchedule{{12, 24, 36}}};
  const auto res =
      run_bandit(Policy::newsvendor(), schedules, bc, {cfg}, 11);

  // at week 36 the labels from weeks 12 and 24 have matured, in that order
  bool found = false;
  for (const auto& snap : res.snapshots) {
    if (snap.week != 36) continue;
    found = true;
    const std::vector<LabeledExample> matured(res.history.begin(),
                                              res.history.begin() + 2);
    const ThetaModel direct = fit_model(matured, bc.ridge_lambda);
    for (std::size_t j = 0; j < direct.theta1.size(); ++j) {
      CHECK(snap.model.theta1[j] == direct.theta1[j]);
      CHECK(snap.model.theta2[j] == direct.theta2[j]);
      CHECK(snap.model.theta3[j] == direct.theta3[j]);
    }
  }
  CHECK(found);
}

TEST_CASE("per-product mode fits each product only from its own labels") {
  ProductConfig a = small_config();
  a.id = 0;
  a.horizon = 30;
  ProductConfig b = a;
  b.id = 1;

  BanditConfig bc;
  bc.H = 6;
  bc.rho = 0.0;
  bc.decay = false;
  bc.baseline_boost = 0.0;
  bc.per_product_model = true;

  // warm labels for product 0 only: a strong, purely action-driven up effect
  const int d = feature_dim(bc.H);
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  x.back() = 1.0;
  BanditRunOptions opts;
  for (int i = 0; i < 10; ++i) {
    opts.initial_history.push_back(LabeledExample{x, 0.8, -1000.0, 0});
    opts.initial_history.push_back(LabeledExample{x, 1.0, 0.0, 0});
    opts.initial_history.push_back(LabeledExample{x, 1.2, 1000.0, 0});
  }

  const std::vector<TargetSchedule> schedules(2, TargetSchedule{{12}});
  const auto res = run_bandit(Policy::newsvendor(), schedules, bc, {a, b}, 3,
                              opts);
  REQUIRE(res.action_log.size() == 2);
  for (const auto& e : res.action_log) {
    if (e.product == 0)
      CHECK(e.multiplier == 1.2);  // learned from its own labels
    else
      CHECK(e.multiplier == 1.0);  // no labels: ties break to baseline
  }
}
