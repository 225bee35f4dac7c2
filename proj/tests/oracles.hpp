#ifndef EMSCREEN_TESTS_ORACLES_HPP
#define EMSCREEN_TESTS_ORACLES_HPP

// Independent reference implementations used by the tests. Everything here
// recomputes from first principles and stays away from the library's own
// code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// ---- densities in long double (small finite-difference steps need the
// ---- extra precision) ----

inline long double pdf_poisson(long double theta, long double x) {
  return expl(-theta + x * logl(theta) - lgammal(x + 1.0L));
}

inline long double pdf_negbin(long double mu, long double r, long double x) {
  const long double t = r + mu;
  return expl(lgammal(r + x) - lgammal(x + 1.0L) - lgammal(r) +
              r * (logl(r) - logl(t)) + x * (logl(mu) - logl(t)));
}

inline long double pdf_normal(long double mu, long double s, long double x) {
  const long double diff = x - mu;
  return expl(-0.5L * logl(2.0L * 3.14159265358979323846264338327950288L * s) -
              0.5L * diff * diff / s);
}

// f(theta) for a family by kind index: 0 poisson, 1 negbin, 2 normal.
inline long double pdf_by_kind(int kind, const std::vector<long double>& th, long double x) {
  switch (kind) {
    case 0: return pdf_poisson(th[0], x);
    case 1: return pdf_negbin(th[0], th[1], x);
    default: return pdf_normal(th[0], th[1], x);
  }
}

// Central finite differences of f normalized by f, with per-coordinate step
// h_k = step_rel * |theta_k|.
struct FdBundle {
  std::vector<double> b1;  // (df/dtheta_h)/f
  std::vector<double> b2;  // diagonals (d2f/dtheta_h^2)/(2f), then off-diagonals (d2f/dth_h dth_l)/f
};

// Central differences at steps h and h/2 combined by one Richardson pass
// (kills the O(h^2) truncation term; long double keeps the roundoff in
// check at the halved step).
inline FdBundle fd_bundle(int kind, const std::vector<double>& theta, double x,
                          double step_rel = 1e-5) {
  const int d = static_cast<int>(theta.size());
  std::vector<long double> th(theta.begin(), theta.end());
  const long double f0 = pdf_by_kind(kind, th, x);
  std::vector<long double> h(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    // relative step with a floor so parameters near zero keep a usable step
    h[k] = static_cast<long double>(step_rel) * fmaxl(fabsl(th[k]), 1.0L);
  }
  auto at = [&](int k, long double dk, int l, long double dl) {
    std::vector<long double> t = th;
    t[static_cast<std::size_t>(k)] += dk;
    if (l >= 0) t[static_cast<std::size_t>(l)] += dl;
    return pdf_by_kind(kind, t, x);
  };
  auto richardson = [](long double coarse, long double fine) {
    return (4.0L * fine - coarse) / 3.0L;
  };
  FdBundle out;
  for (int k = 0; k < d; ++k) {
    auto d1 = [&](long double hh) {
      return (at(k, hh, -1, 0.0L) - at(k, -hh, -1, 0.0L)) / (2.0L * hh * f0);
    };
    out.b1.push_back(static_cast<double>(richardson(d1(h[k]), d1(0.5L * h[k]))));
  }
  for (int k = 0; k < d; ++k) {
    auto d2 = [&](long double hh) {
      return (at(k, hh, -1, 0.0L) - 2.0L * f0 + at(k, -hh, -1, 0.0L)) /
             (2.0L * hh * hh * f0);
    };
    out.b2.push_back(static_cast<double>(richardson(d2(h[k]), d2(0.5L * h[k]))));
  }
  for (int k = 0; k < d; ++k) {
    for (int l = k + 1; l < d; ++l) {
      auto dcross = [&](long double hk, long double hl) {
        return (at(k, hk, l, hl) - at(k, hk, l, -hl) - at(k, -hk, l, hl) +
                at(k, -hk, l, -hl)) /
               (4.0L * hk * hl * f0);
      };
      out.b2.push_back(static_cast<double>(
          richardson(dcross(h[k], h[l]), dcross(0.5L * h[k], 0.5L * h[l]))));
    }
  }
  return out;
}

// ---- weighted NB log-likelihood and its grid-refinement maximizer ----

inline double nb_weighted_loglik(const std::vector<double>& xs, const std::vector<double>& ws,
                                 double mu, double r) {
  double ll = 0.0;
  const double t = r + mu;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ll += ws[i] * (std::lgamma(r + xs[i]) - std::lgamma(xs[i] + 1.0) - std::lgamma(r) +
                   r * (std::log(r) - std::log(t)) + xs[i] * (std::log(mu) - std::log(t)));
  }
  return ll;
}

struct GridFit {
  double mu = 0.0;
  double r = 0.0;
  double loglik = 0.0;
};

// Three-pass 2-D grid refinement over mu in [0.1, 10], r in [0.1, 100].
inline GridFit nb_grid_mle(const std::vector<double>& xs, const std::vector<double>& ws,
                           int points = 201, int passes = 3) {
  double mu_lo = 0.1, mu_hi = 10.0, r_lo = 0.1, r_hi = 100.0;
  GridFit best;
  best.loglik = -1e308;
  for (int pass = 0; pass < passes; ++pass) {
    const double dmu = (mu_hi - mu_lo) / (points - 1);
    const double dr = (r_hi - r_lo) / (points - 1);
    GridFit pass_best;
    pass_best.loglik = -1e308;
    for (int a = 0; a < points; ++a) {
      const double mu = mu_lo + a * dmu;
      for (int b = 0; b < points; ++b) {
        const double r = r_lo + b * dr;
        const double ll = nb_weighted_loglik(xs, ws, mu, r);
        if (ll > pass_best.loglik) pass_best = {mu, r, ll};
      }
    }
    best = pass_best;
    mu_lo = std::max(0.1, pass_best.mu - 2.0 * dmu);
    mu_hi = std::min(10.0, pass_best.mu + 2.0 * dmu);
    r_lo = std::max(0.1, pass_best.r - 2.0 * dr);
    r_hi = std::min(100.0, pass_best.r + 2.0 * dr);
  }
  return best;
}

// ---- brute-force cone maximization for d = 1 and d = 2 ----

inline double cone_objective_vech(const std::vector<double>& v, const std::vector<double>& w,
                                  const std::vector<std::vector<double>>& B) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    lin += v[i] * w[i];
    for (std::size_t j = 0; j < v.size(); ++j) quad += v[i] * B[i][j] * v[j];
  }
  return 2.0 * lin - quad;
}

// d = 1: grid over v >= 0.
inline double cone_grid_d1(double w, double B, double vmax = 50.0) {
  double best = 0.0;
  double lo = 0.0, hi = vmax;
  for (int pass = 0; pass < 3; ++pass) {
    const int n = 2001;
    const double dv = (hi - lo) / (n - 1);
    double arg = lo;
    for (int i = 0; i < n; ++i) {
      const double v = lo + i * dv;
      const double val = 2.0 * v * w - B * v * v;
      if (val > best) {
        best = val;
        arg = v;
      }
    }
    lo = std::max(0.0, arg - 2.0 * dv);
    hi = arg + 2.0 * dv;
  }
  return best;
}

// d = 2, r = 2: grid over PSD V = [[v11, v12], [v12, v22]] with refinement.
// vech order is (V11, V22, V12).
inline double cone_grid_d2_full(const std::vector<double>& w,
                                const std::vector<std::vector<double>>& B,
                                double box = 2.0, int points = 101, int passes = 3) {
  double lo1 = 0.0, hi1 = box, lo2 = 0.0, hi2 = box, lo3 = -box, hi3 = box;
  double best = 0.0;
  for (int pass = 0; pass < passes; ++pass) {
    const double d1 = (hi1 - lo1) / (points - 1);
    const double d2 = (hi2 - lo2) / (points - 1);
    const double d3 = (hi3 - lo3) / (points - 1);
    double a1 = lo1, a2 = lo2, a3 = lo3;
    double pass_best = -1e308;
    for (int a = 0; a < points; ++a) {
      const double v11 = lo1 + a * d1;
      for (int b = 0; b < points; ++b) {
        const double v22 = lo2 + b * d2;
        for (int c = 0; c < points; ++c) {
          const double v12 = lo3 + c * d3;
          if (v11 < 0.0 || v22 < 0.0 || v12 * v12 > v11 * v22) continue;  // not PSD
          const double val = cone_objective_vech({v11, v22, v12}, w, B);
          if (val > pass_best) {
            pass_best = val;
            a1 = v11;
            a2 = v22;
            a3 = v12;
          }
        }
      }
    }
    best = std::max(0.0, pass_best);
    lo1 = std::max(0.0, a1 - 2.0 * d1);
    hi1 = a1 + 2.0 * d1;
    lo2 = std::max(0.0, a2 - 2.0 * d2);
    hi2 = a2 + 2.0 * d2;
    lo3 = a3 - 2.0 * d3;
    hi3 = a3 + 2.0 * d3;
  }
  return best;
}

// d = 2, r = 1: V = a a^T gridded over a (a1 >= 0 by symmetry).
inline double cone_grid_d2_rank1(const std::vector<double>& w,
                                 const std::vector<std::vector<double>>& B,
                                 double box = 2.0, int points = 201, int passes = 3) {
  double lo1 = 0.0, hi1 = box, lo2 = -box, hi2 = box;
  double best = 0.0;
  for (int pass = 0; pass < passes; ++pass) {
    const double d1 = (hi1 - lo1) / (points - 1);
    const double d2 = (hi2 - lo2) / (points - 1);
    double a1 = lo1, a2 = lo2;
    double pass_best = -1e308;
    for (int a = 0; a < points; ++a) {
      const double x = lo1 + a * d1;
      for (int b = 0; b < points; ++b) {
        const double y = lo2 + b * d2;
        const double val = cone_objective_vech({x * x, y * y, x * y}, w, B);
        if (val > pass_best) {
          pass_best = val;
          a1 = x;
          a2 = y;
        }
      }
    }
    best = std::max(0.0, pass_best);
    lo1 = std::max(0.0, a1 - 2.0 * d1);
    hi1 = a1 + 2.0 * d1;
    lo2 = a2 - 2.0 * d2;
    hi2 = a2 + 2.0 * d2;
  }
  return best;
}

// ---- distribution helpers ----

// Chi-square(df) CDF through the error function (df = 1) or adaptive Simpson
// quadrature of the density.
inline double chisq_density(double x, int df) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * df;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps, int depth = 0) {
  const double c = 0.5 * (a + b);
  const double h = b - a;
  const double fa = f(a), fb = f(b), fc = f(c);
  const double s = h / 6.0 * (fa + 4.0 * fc + fb);
  const double lc = 0.5 * (a + c), rc = 0.5 * (c + b);
  const double flc = f(lc), frc = f(rc);
  const double sl = (c - a) / 6.0 * (fa + 4.0 * flc + fc);
  const double sr = (b - c) / 6.0 * (fc + 4.0 * frc + fb);
  if (depth > 40 || std::fabs(sl + sr - s) < 15.0 * eps) {
    return sl + sr + (sl + sr - s) / 15.0;
  }
  return adaptive_simpson(f, a, c, 0.5 * eps, depth + 1) +
         adaptive_simpson(f, c, b, 0.5 * eps, depth + 1);
}

inline double chisq_sf_quadrature(double x, int df, double eps = 1e-12) {
  if (x <= 0.0) return 1.0;
  const double cdf = adaptive_simpson([df](double t) { return chisq_density(t, df); },
                                      1e-300, x, eps);
  return 1.0 - cdf;
}

inline double chisq1_cdf(double x) {
  if (x <= 0.0) return 0.0;
  return std::erf(std::sqrt(0.5 * x));
}

// One-sample Kolmogorov-Smirnov distance of sorted data against a CDF.
inline double ks_distance(std::vector<double> sorted, const std::function<double(double)>& cdf) {
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = cdf(sorted[i]);
    d = std::max(d, std::fabs((static_cast<double>(i) + 1.0) / n - F));
    d = std::max(d, std::fabs(static_cast<double>(i) / n - F));
  }
  return d;
}

// Mean and standard deviation.
inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
  return {m, s};
}

}  // namespace oracle

#endif
