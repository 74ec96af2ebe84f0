// Compares the OpenMP cohort oracle against the serial reference path and
// checks they produce identical results.

#include <chrono>
#include <iostream>

#include "invaudit/harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace invaudit;

int main(int argc, char** argv) {
  long n_products = argc > 1 ? std::atol(argv[1]) : 2000;

  ExperimentConfig cfg;
  cfg.master_seed = 1;
  ProductGeneratorSpec gen;
  gen.count = n_products;
  cfg.generator = gen;
  auto products = cfg.make_products();
  for (auto& p : products) p.horizon = 52;

  const std::vector<Policy> policies(products.size(), Policy::newsvendor());
  std::vector<long> weeks;
  for (long i = 0; i < n_products; ++i) weeks.push_back(i % 40);
  const std::vector<double> multipliers = {0.8, 1.0, 1.2};

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto serial =
      cohort_oracle(policies, products, weeks, 9, multipliers, false);
  const auto t1 = clock::now();
  const auto parallel =
      cohort_oracle(policies, products, weeks, 9, multipliers, true);
  const auto t2 = clock::now();

  for (std::size_t i = 0; i < serial.size(); ++i)
    if (serial[i].best_reward != parallel[i].best_reward ||
        serial[i].best_multiplier != parallel[i].best_multiplier) {
      std::cerr << "MISMATCH at product " << i << "\n";
      return 1;
    }

  const auto ms = [](auto a, auto b) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(b - a)
        .count();
  };
#ifdef _OPENMP
  std::cout << "threads:  " << omp_get_max_threads() << "\n";
#else
  std::cout << "threads:  1 (OpenMP disabled)\n";
#endif
  std::cout << "products: " << n_products << "\n"
            << "serial:   " << ms(t0, t1) << " ms\n"
            << "parallel: " << ms(t1, t2) << " ms\n"
            << "speedup:  "
            << static_cast<double>(ms(t0, t1)) /
                   std::max<long>(1, ms(t1, t2))
            << "x\nresults identical\n";
  return 0;
}
