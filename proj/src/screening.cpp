#include "emscreen/screening.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "emscreen/asymptotics.hpp"
#include "emscreen/rng.hpp"

namespace emscreen {

namespace {

std::uint64_t feature_seed(std::uint64_t seed, std::size_t j) {
  return Rng::mix(seed) ^ Rng::mix(0xFEA7u + static_cast<std::uint64_t>(j) * 0x9e3779b97f4a7c15ULL);
}

}  // namespace

std::vector<double> DataMatrix::feature(std::size_t j) const {
  std::vector<double> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = values[i * p + j];
  return col;
}

void DataMatrix::validate() const {
  if (values.size() != n * p) throw std::invalid_argument("DataMatrix: size mismatch");
  if (!feature_names.empty() && feature_names.size() != p)
    throw std::invalid_argument("DataMatrix: feature name count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double x = at(i, j);
      if (!std::isfinite(x))
        throw std::invalid_argument("DataMatrix: non-finite entry at sample " +
                                    std::to_string(i + 1) + ", feature " + std::to_string(j + 1));
      if (kind == DataKind::count && (x < 0.0 || std::floor(x) != x))
        throw std::invalid_argument("DataMatrix: non-count entry at sample " +
                                    std::to_string(i + 1) + ", feature " + std::to_string(j + 1));
    }
  }
}

std::vector<double> bh_adjust(const std::vector<double>& pvalues) {
  const std::size_t m = pvalues.size();
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("bh_adjust: p-value outside [0, 1]");
  }
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double q = pvalues[order[k]] * static_cast<double>(m) / static_cast<double>(k + 1);
    running = std::min(running, std::min(q, 1.0));
    adjusted[order[k]] = running;
  }
  return adjusted;
}

std::vector<double> combine_batches(const std::vector<std::vector<double>>& pvalue_rows) {
  if (pvalue_rows.empty()) throw std::invalid_argument("combine_batches: need B >= 1");
  const std::size_t p = pvalue_rows.front().size();
  const double B = static_cast<double>(pvalue_rows.size());
  std::vector<double> combined(p);
  for (std::size_t j = 0; j < p; ++j) {
    double mn = 1.0;
    for (const auto& row : pvalue_rows) {
      if (row.size() != p) throw std::invalid_argument("combine_batches: ragged rows");
      mn = std::min(mn, row[j]);
    }
    combined[j] = std::min(B * mn, 1.0);
  }
  return combined;
}

ScreenReport screen(const DataMatrix& data, const FamilySpec& family, const EmConfig& cfg,
                    double vartheta, double fdr, PvalueMethod method, int n_mc,
                    int threads) {
  if (!(vartheta > 0.0 && vartheta < 1.0)) throw std::invalid_argument("screen: need 0 < vartheta < 1");
  if (!(fdr > 0.0 && fdr < 1.0)) throw std::invalid_argument("screen: need 0 < fdr < 1");
  if (data.n < static_cast<std::size_t>(2 * cfg.G)) throw std::invalid_argument("screen: need n >= 2G");
  if (method == PvalueMethod::montecarlo && family.kind() == FamilyKind::normal)
    throw std::invalid_argument("screen: the normal family supports only the chisq p-value method");
  cfg.validate();
  data.validate();

  const int d = family.dim();
  const int df = d * (d + 1) / 2;
  const int r = std::min(cfg.G - 1, d);

  ScreenReport report;
  report.per_feature.resize(data.p);
  report.t_n = std::pow(static_cast<double>(data.n), vartheta);
  report.family = family.kind();
  report.G = cfg.G;
  report.K = cfg.K;
  report.lambda = cfg.lambda;
  report.vartheta = vartheta;
  report.fdr = fdr;
  report.pvalue_method = method;
  report.n_mc = method == PvalueMethod::montecarlo ? n_mc : 0;
  report.seed = cfg.seed;

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    try {
      for (;;) {
        const std::size_t j = next.fetch_add(1);
        if (j >= data.p) break;
        const std::vector<double> xs = data.feature(j);
        EmConfig feature_cfg = cfg;
        feature_cfg.seed = feature_seed(cfg.seed, j);
        const EmTestResult em = em_test_statistic(family, xs, feature_cfg);
        FeatureResult& out = report.per_feature[j];
        out.statistic = em.statistic;
        out.boundary_flag = em.boundary_flag;
        const bool constant_column =
            ObsSet::from_sample(xs).values.size() == 1;
        if (constant_column) {
          out.statistic = 0.0;
          out.pvalue = 1.0;
          out.boundary_flag = true;
        } else if (method == PvalueMethod::chisq) {
          out.pvalue = pvalue_chisq(em.statistic, df);
        } else {
          const BMatrices bm = estimate_b_matrices(family, em.theta0_hat, xs);
          if (bm.singular_flag) {
            out.pvalue = pvalue_chisq(em.statistic, df);
            out.boundary_flag = true;
          } else {
            const LimitSample sample =
                sample_limit_dist(bm.B22_tilde, r, n_mc, feature_seed(cfg.seed, j) ^ 0x4Cu);
            out.pvalue = pvalue_montecarlo(em.statistic, sample);
          }
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };

  const int nthreads = std::max(1, threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<double> pvalues(data.p);
  for (std::size_t j = 0; j < data.p; ++j) pvalues[j] = report.per_feature[j].pvalue;
  const std::vector<double> adjusted = bh_adjust(pvalues);
  for (std::size_t j = 0; j < data.p; ++j) {
    report.per_feature[j].pvalue_adjusted = adjusted[j];
    if (report.per_feature[j].statistic >= report.t_n)
      report.selected_threshold.push_back(j + 1);
    if (adjusted[j] < fdr) report.selected_fdr.push_back(j + 1);
  }
  return report;
}

GofResult pearson_gof(const std::vector<double>& observed,
                      const std::vector<double>& probs, int d) {
  if (observed.size() != probs.size() || observed.empty())
    throw std::invalid_argument("pearson_gof: bin mismatch");
  double n = 0.0;
  for (double o : observed) n += o;
  GofResult res;
  res.df = std::max(static_cast<int>(observed.size()) - 1 - d, 1);
  double x2 = 0.0;
  for (std::size_t b = 0; b < observed.size(); ++b) {
    const double expected = n * probs[b];
    if (expected <= 0.0) continue;
    const double diff = observed[b] - expected;
    x2 += diff * diff / expected;
  }
  res.statistic = x2;
  res.pvalue = pvalue_chisq(x2, res.df);
  return res;
}

namespace {

// Model CDF at x (inclusive for count families).
double model_cdf(const FamilySpec& family, const Theta& theta, double x) {
  if (family.kind() == FamilyKind::normal) {
    return 0.5 * std::erfc(-(x - theta[0]) / std::sqrt(2.0 * theta[1]));
  }
  if (x < 0.0) return 0.0;
  double acc = 0.0;
  const long long top = static_cast<long long>(std::floor(x));
  for (long long k = 0; k <= top; ++k) {
    acc += std::exp(family.log_pdf_raw(theta, static_cast<double>(k)));
    if (acc >= 1.0) return 1.0;
  }
  return std::min(acc, 1.0);
}

double sorted_quantile(const std::vector<double>& sorted, double level) {
  const std::size_t n = sorted.size();
  const std::size_t idx = std::min(
      n - 1, static_cast<std::size_t>(std::ceil(level * static_cast<double>(n))) - 1);
  return sorted[idx];
}

}  // namespace

GofResult chisq_gof_feature(const std::vector<double>& xs, const FamilySpec& family) {
  GofResult res;
  const ObsSet obs = ObsSet::from_sample(xs);
  if (obs.values.size() == 1) {
    res.boundary_flag = true;
    return res;
  }
  const FitResult fit = family.weighted_mle(obs);
  res.boundary_flag = fit.clamped;

  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  // Four bins at the quartiles; duplicated edges collapse.
  std::vector<double> edges;
  for (double level : {0.25, 0.5, 0.75}) {
    const double e = sorted_quantile(sorted, level);
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  while (!edges.empty() && edges.back() >= sorted.back()) edges.pop_back();

  const std::size_t bins = edges.size() + 1;
  std::vector<double> observed(bins, 0.0);
  for (double x : xs) {
    std::size_t b = 0;
    while (b < edges.size() && x > edges[b]) ++b;
    observed[b] += 1.0;
  }
  std::vector<double> probs(bins, 0.0);
  double prev = 0.0;
  for (std::size_t b = 0; b < edges.size(); ++b) {
    const double c = model_cdf(family, fit.theta, edges[b]);
    probs[b] = std::max(c - prev, 0.0);
    prev = c;
  }
  probs[bins - 1] = std::max(1.0 - prev, 0.0);

  // Merge bins with expected count < 5 into their right neighbor (the last
  // one merges leftward).
  const double n = static_cast<double>(xs.size());
  std::vector<double> fo, fp;
  for (std::size_t b = 0; b < bins; ++b) {
    if (!fo.empty() && n * fp.back() < 5.0) {
      fo.back() += observed[b];
      fp.back() += probs[b];
    } else {
      fo.push_back(observed[b]);
      fp.push_back(probs[b]);
    }
  }
  while (fo.size() > 1 && n * fp.back() < 5.0) {
    fp[fp.size() - 2] += fp.back();
    fo[fo.size() - 2] += fo.back();
    fp.pop_back();
    fo.pop_back();
  }
  if (fo.size() < 2) {
    res.boundary_flag = true;
    res.statistic = 0.0;
    res.pvalue = 1.0;
    return res;
  }
  const GofResult pearson = pearson_gof(fo, fp, family.dim());
  res.statistic = pearson.statistic;
  res.pvalue = pearson.pvalue;
  res.df = pearson.df;
  return res;
}

ScreenReport chisq_gof_screen(const DataMatrix& data, const FamilySpec& family, double fdr) {
  if (!(fdr > 0.0 && fdr < 1.0)) throw std::invalid_argument("chisq_gof_screen: need 0 < fdr < 1");
  if (data.n < 40) throw std::invalid_argument("chisq_gof_screen: need n >= 40");
  data.validate();
  ScreenReport report;
  report.per_feature.resize(data.p);
  report.family = family.kind();
  report.fdr = fdr;
  report.t_n = 0.0;
  std::vector<double> pvalues(data.p);
  for (std::size_t j = 0; j < data.p; ++j) {
    const GofResult res = chisq_gof_feature(data.feature(j), family);
    report.per_feature[j].statistic = res.statistic;
    report.per_feature[j].pvalue = res.pvalue;
    report.per_feature[j].boundary_flag = res.boundary_flag;
    pvalues[j] = res.pvalue;
  }
  const std::vector<double> adjusted = bh_adjust(pvalues);
  for (std::size_t j = 0; j < data.p; ++j) {
    report.per_feature[j].pvalue_adjusted = adjusted[j];
    if (adjusted[j] < fdr) report.selected_fdr.push_back(j + 1);
  }
  return report;
}

DataMatrix downsample_counts(const DataMatrix& data, long long target, std::uint64_t seed) {
  if (data.kind != DataKind::count)
    throw std::invalid_argument("downsample_counts: count data required");
  if (target < 0) throw std::invalid_argument("downsample_counts: negative target");
  data.validate();
  std::vector<std::size_t> short_rows;
  std::vector<long long> totals(data.n, 0);
  for (std::size_t i = 0; i < data.n; ++i) {
    long long tot = 0;
    for (std::size_t j = 0; j < data.p; ++j) tot += static_cast<long long>(data.at(i, j));
    totals[i] = tot;
    if (tot < target) short_rows.push_back(i + 1);
  }
  if (!short_rows.empty()) {
    std::string msg = "downsample_counts: samples below target:";
    for (std::size_t i : short_rows) msg += " " + std::to_string(i);
    throw std::invalid_argument(msg);
  }
  DataMatrix out = data;
  for (std::size_t i = 0; i < data.n; ++i) {
    Rng rng = Rng::stream(seed, 0xD0147u + static_cast<std::uint64_t>(i));
    long long remaining = totals[i];
    long long need = target;
    for (std::size_t j = 0; j < data.p; ++j) {
      const long long x = static_cast<long long>(data.at(i, j));
      long long take = 0;
      if (need > 0 && x > 0) {
        take = (remaining == x) ? need : rng.hypergeom(remaining, x, need);
      }
      out.at(i, j) = static_cast<double>(take);
      remaining -= x;
      need -= take;
    }
  }
  return out;
}

}  // namespace emscreen
