#include "emscreen/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "emscreen/rng.hpp"

namespace emscreen {

std::vector<std::size_t> rank_features(const std::vector<double>& statistics) {
  std::vector<std::size_t> order(statistics.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return statistics[a - 1] > statistics[b - 1];
  });
  return order;
}

std::size_t min_model_size(const std::vector<std::size_t>& ranking,
                           const std::vector<std::size_t>& relevant) {
  if (relevant.empty()) throw std::invalid_argument("min_model_size: empty relevant set");
  std::set<std::size_t> want(relevant.begin(), relevant.end());
  std::size_t covered = 0;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    if (want.count(ranking[k])) {
      ++covered;
      if (covered == want.size()) return k + 1;
    }
  }
  throw std::invalid_argument("min_model_size: relevant feature missing from the ranking");
}

std::pair<std::size_t, std::size_t> retained_counts(const std::vector<std::size_t>& selected,
                                                    const std::vector<std::size_t>& relevant) {
  std::set<std::size_t> want(relevant.begin(), relevant.end());
  std::size_t r = 0, f = 0;
  for (std::size_t j : selected) {
    if (want.count(j)) ++r;
    else ++f;
  }
  return {r, f};
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

struct LloydRun {
  std::vector<int> labels;
  double objective = std::numeric_limits<double>::infinity();
};

LloydRun lloyd_once(const std::vector<std::vector<double>>& points, int G, Rng& rng) {
  const std::size_t n = points.size();
  const std::size_t q = points.front().size();
  const std::size_t k = static_cast<std::size_t>(G);

  // k-means++ seeding
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  centers.push_back(points[static_cast<std::size_t>(rng.u01() * static_cast<double>(n))]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total > 0.0) {
      const double u = rng.u01() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.u01() * static_cast<double>(n));
    }
    centers.push_back(points[pick]);
  }

  LloydRun run;
  run.labels.assign(n, 1);
  double prev_obj = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    double obj = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best_g = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t g = 0; g < k; ++g) {
        const double d = sq_dist(points[i], centers[g]);
        if (d < best) {
          best = d;
          best_g = static_cast<int>(g) + 1;
        }
      }
      obj += best;
      if (run.labels[i] != best_g) {
        run.labels[i] = best_g;
        changed = true;
      }
    }
    if (obj > prev_obj * (1.0 + 1e-9) + 1e-12)
      throw std::logic_error("kmeans: objective increased across a Lloyd iteration");
    run.objective = obj;
    if (!changed && it > 0) break;
    prev_obj = obj;

    std::vector<std::vector<double>> sums(k, std::vector<double>(q, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t g = static_cast<std::size_t>(run.labels[i] - 1);
      ++counts[g];
      for (std::size_t c = 0; c < q; ++c) sums[g][c] += points[i][c];
    }
    for (std::size_t g = 0; g < k; ++g) {
      if (counts[g] == 0) {
        // Re-seed an empty cluster at the point farthest from its center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_dist(points[i], centers[static_cast<std::size_t>(run.labels[i] - 1)]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers[g] = points[far];
        prev_obj = std::numeric_limits<double>::infinity();
      } else {
        for (std::size_t c = 0; c < q; ++c) centers[g][c] = sums[g][c] / static_cast<double>(counts[g]);
      }
    }
  }
  return run;
}

}  // namespace

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int G,
                    std::uint64_t seed, int restarts) {
  if (points.empty() || points.front().empty())
    throw std::invalid_argument("kmeans: need n >= 1, q >= 1");
  if (G < 1 || static_cast<std::size_t>(G) > points.size())
    throw std::invalid_argument("kmeans: need 1 <= G <= n");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
  KmeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int rs = 0; rs < restarts; ++rs) {
    Rng rng = Rng::stream(seed, 0x4aea5u + static_cast<std::uint64_t>(rs));
    LloydRun run = lloyd_once(points, G, rng);
    if (run.objective < best.objective) {
      best.objective = run.objective;
      best.labels = std::move(run.labels);
    }
  }
  return best;
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ari: length mismatch");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;

  auto compress = [](const std::vector<int>& v) {
    std::vector<int> ids(v.size());
    std::vector<int> uniq(v);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      ids[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), v[i]) - uniq.begin());
    }
    return std::make_pair(ids, uniq.size());
  };
  const auto [ia, ka] = compress(a);
  const auto [ib, kb] = compress(b);

  std::vector<std::vector<long long>> table(ka, std::vector<long long>(kb, 0));
  std::vector<long long> ra(ka, 0), cb(kb, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++table[static_cast<std::size_t>(ia[i])][static_cast<std::size_t>(ib[i])];
    ++ra[static_cast<std::size_t>(ia[i])];
    ++cb[static_cast<std::size_t>(ib[i])];
  }
  auto choose2 = [](long long m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1); };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(ka); ++i) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(kb); ++j) sum_ij += choose2(table[i][j]);
  }
  for (long long v : ra) sum_a += choose2(v);
  for (long long v : cb) sum_b += choose2(v);
  const double expected = sum_a * sum_b / choose2(static_cast<long long>(n));
  const double maximum = 0.5 * (sum_a + sum_b);
  const double denom = maximum - expected;
  if (denom == 0.0) return 0.0;
  return (sum_ij - expected) / denom;
}

namespace {

std::vector<std::vector<double>> select_columns(const DataMatrix& data,
                                                const std::vector<std::size_t>& features) {
  std::vector<std::vector<double>> pts(data.n, std::vector<double>(features.size()));
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t c = 0; c < features.size(); ++c) {
      pts[i][c] = data.at(i, features[c] - 1);
    }
  }
  return pts;
}

double cluster_ari(const SimDataset& ds, const std::vector<std::size_t>& features, int G,
                   std::uint64_t seed) {
  if (features.empty()) return 0.0;
  const auto pts = select_columns(ds.data, features);
  const KmeansResult km = kmeans(pts, G, seed);
  return ari(km.labels, ds.labels);
}

}  // namespace

const std::vector<std::string>& bench_metric_names() {
  static const std::vector<std::string> names = {
      "S",        "R_fdr",      "F_fdr",        "R_thresh",  "F_thresh",
      "ARI_fdr",  "ARI_thresh", "ARI_noscreen", "ARI_oracle"};
  return names;
}

BenchSummary bench_case(const SimScenario& scenario, const EmConfig& cfg, double vartheta,
                        double fdr, int reps, int threads) {
  if (reps < 1) throw std::invalid_argument("bench_case: reps must be >= 1");
  const FamilySpec family(scenario.family_kind);
  BenchSummary summary;
  summary.rows.reserve(static_cast<std::size_t>(reps));

  for (int rep = 0; rep < reps; ++rep) {
    SimScenario sc = scenario;
    sc.seed = Rng::mix(scenario.seed) ^ Rng::mix(0xbe7c4ULL + static_cast<std::uint64_t>(rep));
    const SimDataset ds = generate(sc);

    EmConfig rep_cfg = cfg;
    rep_cfg.seed = sc.seed ^ 0x5c4ee7ULL;
    const ScreenReport report = screen(ds.data, family, rep_cfg, vartheta, fdr,
                                       PvalueMethod::chisq, 0, threads);

    BenchRow row;
    std::vector<double> stats(ds.data.p);
    for (std::size_t j = 0; j < ds.data.p; ++j) stats[j] = report.per_feature[j].statistic;
    row.min_size() = static_cast<double>(min_model_size(rank_features(stats), ds.relevant));
    const auto [rf, ff] = retained_counts(report.selected_fdr, ds.relevant);
    const auto [rt, ft] = retained_counts(report.selected_threshold, ds.relevant);
    row.r_fdr() = static_cast<double>(rf);
    row.f_fdr() = static_cast<double>(ff);
    row.r_thresh() = static_cast<double>(rt);
    row.f_thresh() = static_cast<double>(ft);

    const std::uint64_t kseed = sc.seed ^ 0x6aea5ULL;
    std::vector<std::size_t> all(ds.data.p);
    for (std::size_t j = 0; j < ds.data.p; ++j) all[j] = j + 1;
    row.ari_fdr() = cluster_ari(ds, report.selected_fdr, scenario.G, kseed);
    row.ari_thresh() = cluster_ari(ds, report.selected_threshold, scenario.G, kseed);
    row.ari_noscreen() = cluster_ari(ds, all, scenario.G, kseed);
    row.ari_oracle() = cluster_ari(ds, ds.relevant, scenario.G, kseed);
    summary.rows.push_back(row);
  }

  const double nreps = static_cast<double>(summary.rows.size());
  for (std::size_t k = 0; k < summary.mean.values.size(); ++k) {
    double m = 0.0;
    for (const BenchRow& r : summary.rows) m += r[k];
    m /= nreps;
    double v = 0.0;
    for (const BenchRow& r : summary.rows) {
      const double d = r[k] - m;
      v += d * d;
    }
    summary.mean.values[k] = m;
    summary.sd.values[k] = summary.rows.size() > 1 ? std::sqrt(v / (nreps - 1.0)) : 0.0;
  }
  return summary;
}

}  // namespace emscreen
