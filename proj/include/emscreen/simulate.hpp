#ifndef EMSCREEN_SIMULATE_HPP
#define EMSCREEN_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "emscreen/screening.hpp"

namespace emscreen {

enum class SignalLevel { low, med, high };
enum class NoiseLevel { low, high };

// Benchmark scenario description. Count cases use five clusters with
// proportions (0.5, 0.125, 0.125, 0.125, 0.125) and 20 relevant features in
// blocks of five, each block elevating one cluster's mean.
struct SimScenario {
  FamilyKind family_kind = FamilyKind::negbin;
  // count cases
  SignalLevel signal = SignalLevel::med;
  NoiseLevel noise = NoiseLevel::high;
  // normal cases
  bool balanced = true;
  std::size_t p = 500;
  std::size_t n = 1000;
  std::size_t s = 20;  // relevant features, the first s indices
  int G = 5;
  std::uint64_t seed = 1;

  std::vector<double> alpha_true() const;
  std::string case_id() const;
  static SimScenario from_case_id(const std::string& id, std::size_t p, std::size_t n,
                                  std::uint64_t seed);
  void validate() const;
};

struct FeatureTruth {
  double r_or_sigma = 0.0;  // NB size r_j, or sigma_j for normal cases
  double u = 0.0;
  double D = 0.0;     // 0 for irrelevant features
  int elevated = 0;   // 1-based elevated cluster, 0 if none
  std::vector<double> mu;  // per-cluster means, length G
};

struct SimDataset {
  DataMatrix data;
  std::vector<int> labels;            // 1..G
  std::vector<std::size_t> relevant;  // 1-based, {1..s}
  std::vector<FeatureTruth> truth;
};

// Draw order (one splitmix64 stream per dataset): cluster labels for
// i = 1..n, then per-feature parameters in index order, then matrix entries
// row-major.
SimDataset gen_nb_case(const SimScenario& scenario);
SimDataset gen_normal_case(const SimScenario& scenario);
SimDataset generate(const SimScenario& scenario);

}  // namespace emscreen

#endif
