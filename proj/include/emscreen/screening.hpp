#ifndef EMSCREEN_SCREENING_HPP
#define EMSCREEN_SCREENING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "emscreen/emtest.hpp"
#include "emscreen/families.hpp"

namespace emscreen {

enum class DataKind { count, continuous };
enum class PvalueMethod { chisq, montecarlo };

// Samples-by-features matrix, row major, no missing entries.
struct DataMatrix {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> values;             // n * p, row major
  std::vector<std::string> feature_names; // empty or length p
  DataKind kind = DataKind::count;

  double at(std::size_t i, std::size_t j) const { return values[i * p + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * p + j]; }
  std::vector<double> feature(std::size_t j) const;
  void validate() const;
};

struct FeatureResult {
  double statistic = 0.0;
  double pvalue = 1.0;
  double pvalue_adjusted = 1.0;
  bool boundary_flag = false;
};

struct ScreenReport {
  std::vector<FeatureResult> per_feature;
  std::vector<std::size_t> selected_threshold;  // 1-based feature indices
  std::vector<std::size_t> selected_fdr;        // 1-based feature indices
  double t_n = 0.0;
  // config echo
  FamilyKind family = FamilyKind::negbin;
  int G = 5;
  int K = 100;
  double lambda = 1e-5;
  double vartheta = 0.35;
  double fdr = 0.01;
  PvalueMethod pvalue_method = PvalueMethod::chisq;
  int n_mc = 0;
  std::uint64_t seed = 0;
};

// Benjamini-Hochberg step-up adjusted p-values, order preserved.
std::vector<double> bh_adjust(const std::vector<double>& pvalues);

// Bonferroni-type combination across batches: B * column min, capped at 1.
std::vector<double> combine_batches(const std::vector<std::vector<double>>& pvalue_rows);

// EM-test screening over all features: hard threshold t_n = n^vartheta and
// BH-adjusted p-value cutoff. Deterministic per (data, cfg, seed) for any
// thread count.
ScreenReport screen(const DataMatrix& data, const FamilySpec& family, const EmConfig& cfg,
                    double vartheta, double fdr, PvalueMethod method, int n_mc = 10000,
                    int threads = 1);

// Pearson X^2 of observed bin counts against model bin probabilities;
// df = bins - 1 - d floored at 1.
struct GofResult {
  double statistic = 0.0;
  double pvalue = 1.0;
  int df = 1;
  bool boundary_flag = false;
};
GofResult pearson_gof(const std::vector<double>& observed,
                      const std::vector<double>& probs, int d);

// Goodness-of-fit baseline: quartile bins (expected < 5 merged rightward),
// homogeneous fit per feature, BH-adjusted p-values.
ScreenReport chisq_gof_screen(const DataMatrix& data, const FamilySpec& family, double fdr);
GofResult chisq_gof_feature(const std::vector<double>& xs, const FamilySpec& family);

// Per-sample multivariate hypergeometric thinning to a common total.
DataMatrix downsample_counts(const DataMatrix& data, long long target, std::uint64_t seed);

}  // namespace emscreen

#endif
