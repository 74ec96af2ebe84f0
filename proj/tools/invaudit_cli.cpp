#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "invaudit/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int load_config(const std::string& path, invaudit::ExperimentConfig& out) {
  auto result = invaudit::validate_config(read_file(path));
  if (!result.ok()) {
    std::cerr << "config validation failed:\n";
    for (const auto& e : result.errors) std::cerr << "  " << e << '\n';
    return 1;
  }
  out = *result.config;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inventory policy auditing via contextual bandits"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string policy_name;
  std::string format = "table";
  std::uint64_t seed_override = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")
        ->required();
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&](std::uint64_t v) {
          seed_override = v;
          seed_set = true;
        },
        "master seed override");
    cmd->add_option("--format", format, "table or machine")
        ->check(CLI::IsMember({"table", "machine"}));
  };

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path)->required();

  auto* simulate = app.add_subcommand(
      "simulate", "roll out one policy and dump trajectories");
  add_common(simulate);
  simulate->add_option("--policy", policy_name, "policy name from the config");

  auto* audit =
      app.add_subcommand("audit", "full bandit audit producing a report");
  add_common(audit);
  audit->add_option("--policy", policy_name, "audit only this policy");

  auto* equilibrium = app.add_subcommand(
      "equilibrium", "brute-force equilibrium gap on small instances");
  add_common(equilibrium);
  equilibrium->add_option("--policy", policy_name);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      auto result = invaudit::validate_config(read_file(config_path));
      if (!result.ok()) {
        std::cerr << "config validation failed:\n";
        for (const auto& e : result.errors) std::cerr << "  " << e << '\n';
        return 1;
      }
      std::cout << invaudit::config_echo_json(*result.config) << '\n';
      return 0;
    }

    invaudit::ExperimentConfig config;
    if (int rc = load_config(config_path, config); rc != 0) return rc;
    if (seed_set) config.master_seed = seed_override;
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (!policy_name.empty()) {
      std::vector<invaudit::PolicySpec> kept;
      for (const auto& p : config.policies)
        if (p.name == policy_name) kept.push_back(p);
      if (kept.empty()) {
        std::cerr << "no policy named '" << policy_name << "' in config\n";
        return 1;
      }
      config.policies = kept;
    }

    if (simulate->parsed()) {
      const auto products = config.make_products();
      const auto policies = invaudit::resolve_policy(
          config.policies.front(), products, config.train_horizon,
          config.master_seed, true);
      std::filesystem::create_directories(config.output_dir);
      std::ofstream out(std::filesystem::path(config.output_dir) /
                        "trajectories.csv");
      out << "product_id,t,on_hand_start,arrivals,demand,sales,lost_sales,"
             "order,reward\n";
      for (std::size_t p = 0; p < products.size(); ++p) {
        invaudit::PolicySource source(policies[p]);
        auto traj =
            invaudit::simulate(source, products[p], config.master_seed);
        for (const auto& r : traj.records)
          out << products[p].id << ',' << r.t << ',' << r.on_hand_start << ','
              << r.arrivals << ',' << r.demand << ',' << r.sales << ','
              << r.lost_sales << ',' << r.order << ',' << r.reward << '\n';
      }
      const std::string path = config.output_dir + "/trajectories.csv";
      if (format == "machine") {
        nlohmann::ordered_json j;
        j["trajectories"] = path;
        j["products"] = products.size();
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << "wrote " << path << '\n';
      }
      return 0;
    }

    if (audit->parsed()) {
      auto artifacts = invaudit::run_experiment(config);
      invaudit::write_artifacts(config, artifacts);
      if (format == "machine")
        std::cout << artifacts.machine_json;
      else
        std::cout << artifacts.table_text;
      return 0;
    }

    if (equilibrium->parsed()) {
      if (config.schedule_mode != "explicit") {
        std::cerr << "equilibrium requires an explicit schedule "
                     "(schedule_mode as an array of weeks)\n";
        return 1;
      }
      const auto products = config.make_products();
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      for (const auto& spec : config.policies) {
        const auto policies = invaudit::resolve_policy(
            spec, products, config.train_horizon, config.master_seed, true);
        std::vector<std::uint64_t> seeds;
        for (int s = 0; s < config.n_seeds; ++s)
          seeds.push_back(invaudit::detail::splitmix64(
              config.master_seed ^ static_cast<std::uint64_t>(s)));
        nlohmann::ordered_json entry;
        entry["policy"] = spec.name;
        entry["per_product"] = nlohmann::ordered_json::array();
        double total = 0.0;
        for (std::size_t p = 0; p < products.size(); ++p) {
          invaudit::PolicySource source(policies[p]);
          auto gap = invaudit::brute_force_equilibrium_gap(
              source, products[p], seeds, config.explicit_schedule,
              config.bandit.multipliers);
          if (format == "machine") {
            nlohmann::ordered_json row;
            row["product"] = products[p].id;
            row["epsilon_hat"] = gap.epsilon_hat;
            entry["per_product"].push_back(row);
          } else {
            std::cout << spec.name << " product " << products[p].id
                      << " epsilon_hat " << gap.epsilon_hat << '\n';
          }
          total += gap.epsilon_hat;
        }
        const double mean = total / static_cast<double>(products.size());
        if (format == "machine") {
          entry["mean_epsilon_hat"] = mean;
          out.push_back(entry);
        } else {
          std::cout << spec.name << " mean epsilon_hat " << mean << '\n';
        }
      }
      if (format == "machine") std::cout << out.dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
