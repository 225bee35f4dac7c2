#ifndef EMSCREEN_EVALMETRICS_HPP
#define EMSCREEN_EVALMETRICS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "emscreen/simulate.hpp"

namespace emscreen {

// Features sorted by decreasing statistic, ties broken by ascending index.
std::vector<std::size_t> rank_features(const std::vector<double>& statistics);

// Smallest prefix of the ranking containing every relevant feature
// (1-based indices on both sides).
std::size_t min_model_size(const std::vector<std::size_t>& ranking,
                           const std::vector<std::size_t>& relevant);

// (correctly retained, falsely retained).
std::pair<std::size_t, std::size_t> retained_counts(const std::vector<std::size_t>& selected,
                                                    const std::vector<std::size_t>& relevant);

// Lloyd k-means with k-means++ seeding, squared Euclidean objective, empty
// clusters re-seeded at the farthest point, best of `restarts` by objective.
struct KmeansResult {
  std::vector<int> labels;  // 1..G
  double objective = 0.0;
};
KmeansResult kmeans(const std::vector<std::vector<double>>& points, int G,
                    std::uint64_t seed, int restarts = 10);

// Adjusted Rand index (Hubert-Arabie); 0 when the expected-index denominator
// vanishes.
double ari(const std::vector<int>& a, const std::vector<int>& b);

// One replication's metrics; the order matches bench_metric_names().
struct BenchRow {
  std::array<double, 9> values{};

  double& min_size() { return values[0]; }
  double& r_fdr() { return values[1]; }
  double& f_fdr() { return values[2]; }
  double& r_thresh() { return values[3]; }
  double& f_thresh() { return values[4]; }
  double& ari_fdr() { return values[5]; }
  double& ari_thresh() { return values[6]; }
  double& ari_noscreen() { return values[7]; }
  double& ari_oracle() { return values[8]; }
  double operator[](std::size_t k) const { return values[k]; }
};

const std::vector<std::string>& bench_metric_names();

struct BenchSummary {
  std::vector<BenchRow> rows;
  BenchRow mean;
  BenchRow sd;  // sample standard deviation over replications
};

// Full benchmark replication loop: generate, screen, score both selection
// rules, cluster with k-means on each feature set.
BenchSummary bench_case(const SimScenario& scenario, const EmConfig& cfg, double vartheta,
                        double fdr, int reps, int threads = 1);

}  // namespace emscreen

#endif
