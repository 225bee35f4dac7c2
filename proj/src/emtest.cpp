#include "emscreen/emtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "emscreen/rng.hpp"

namespace emscreen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log f(v_k; theta_g) for every distinct value, one row per component.
void log_pdf_table(const FamilySpec& family, const std::vector<Theta>& xi,
                   const ObsSet& obs, std::vector<std::vector<double>>& table) {
  table.resize(xi.size());
  for (std::size_t g = 0; g < xi.size(); ++g) {
    table[g].resize(obs.values.size());
    for (std::size_t k = 0; k < obs.values.size(); ++k) {
      table[g][k] = family.log_pdf_raw(xi[g], obs.values[k]);
    }
  }
}

// Unpenalized mixture log-likelihood over the compressed sample, and
// optionally the posterior weight rows (one per distinct value).
double mixture_loglik(const std::vector<std::vector<double>>& table,
                      const std::vector<double>& alpha, const ObsSet& obs,
                      std::vector<std::vector<double>>* post) {
  const std::size_t G = alpha.size();
  const std::size_t m = obs.values.size();
  std::vector<double> la(G);
  for (std::size_t g = 0; g < G; ++g) la[g] = std::log(alpha[g]);
  if (post) {
    post->assign(G, std::vector<double>(m));
  }
  double ll = 0.0;
  std::vector<double> term(G);
  for (std::size_t k = 0; k < m; ++k) {
    double mx = -kInf;
    for (std::size_t g = 0; g < G; ++g) {
      term[g] = la[g] + table[g][k];
      if (term[g] > mx) mx = term[g];
    }
    double sum = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      term[g] = std::exp(term[g] - mx);
      sum += term[g];
    }
    ll += obs.weights[k] * (mx + std::log(sum));
    if (post) {
      for (std::size_t g = 0; g < G; ++g) (*post)[g][k] = term[g] / sum;
    }
  }
  return ll;
}

// One weighted component refit; keeps the incumbent when the component has
// effectively no mass. Zero-weight entries are dropped so single-support
// degeneracy is detected.
Theta refit_component(const FamilySpec& family, const ObsSet& obs,
                      const std::vector<double>& post_row, const Theta& incumbent) {
  ObsSet comp;
  for (std::size_t k = 0; k < obs.values.size(); ++k) {
    const double w = obs.weights[k] * post_row[k];
    if (w > 0.0) {
      comp.values.push_back(obs.values[k]);
      comp.weights.push_back(w);
      comp.total += w;
    }
  }
  if (!(comp.total > 1e-12)) return incumbent;
  return family.weighted_mle(comp).theta;
}

struct EmRun {
  MixtureState state;
  double pl = -kInf;
  int iterations = 0;
  std::vector<double> trace;
};

// Alternating (E, M_alpha, M_theta) updates with early stop on relative
// penalized-log-likelihood improvement. When freeze_alpha is set the
// proportions stay fixed (the initialization fit).
EmRun run_em(const FamilySpec& family, const ObsSet& obs, MixtureState state,
             double lambda, int max_updates, double tol, bool freeze_alpha,
             bool record_trace) {
  const std::size_t G = state.alpha.size();
  const double n = obs.total;
  std::vector<std::vector<double>> table, post;
  log_pdf_table(family, state.xi, obs, table);
  double pl = mixture_loglik(table, state.alpha, obs, &post) +
              penalty(state.alpha, lambda);
  EmRun run;
  if (record_trace) run.trace.push_back(pl);
  int it = 0;
  while (it < max_updates) {
    // posteriors already match (state, table)
    if (!freeze_alpha) {
      for (std::size_t g = 0; g < G; ++g) {
        double s = 0.0;
        for (std::size_t k = 0; k < obs.values.size(); ++k) {
          s += obs.weights[k] * post[g][k];
        }
        state.alpha[g] = (s + lambda) / (n + static_cast<double>(G) * lambda);
      }
    }
    for (std::size_t g = 0; g < G; ++g) {
      state.xi[g] = refit_component(family, obs, post[g], state.xi[g]);
    }
    ++it;
    log_pdf_table(family, state.xi, obs, table);
    const double pl_new = mixture_loglik(table, state.alpha, obs, &post) +
                          penalty(state.alpha, lambda);
    if (record_trace) run.trace.push_back(pl_new);
    const double improve = pl_new - pl;
    pl = pl_new;
    if (improve < tol * (std::fabs(pl) + 1.0)) break;
  }
  run.state = std::move(state);
  run.pl = pl;
  run.iterations = it;
  return run;
}

// Weighted lower quantile of the compressed sample.
double obs_quantile(const ObsSet& obs, double level) {
  const double target = level * obs.total;
  double acc = 0.0;
  for (std::size_t k = 0; k < obs.values.size(); ++k) {
    acc += obs.weights[k];
    if (acc >= target) return obs.values[k];
  }
  return obs.values.back();
}

MixtureState seed_state(const FamilySpec& family, const ObsSet& obs,
                        const std::vector<double>& alpha0, const Theta& theta0,
                        int start, Rng& rng) {
  const int G = static_cast<int>(alpha0.size());
  MixtureState state;
  state.alpha = alpha0;
  state.xi.resize(static_cast<std::size_t>(G));
  for (int g = 1; g <= G; ++g) {
    double level = static_cast<double>(g) / (G + 1.0);
    if (start > 0) {
      level += rng.uniform(-0.45, 0.45) / (G + 1.0);
      level = std::min(std::max(level, 0.02), 0.98);
    }
    const double q = obs_quantile(obs, level);
    Theta theta;
    switch (family.kind()) {
      case FamilyKind::poisson:
        theta = Theta(std::max(q, 0.05));
        break;
      case FamilyKind::negbin:
        theta = Theta(std::max(q, 0.05), theta0[1]);
        break;
      case FamilyKind::normal:
        theta = Theta(q, theta0[1]);
        break;
    }
    state.xi[static_cast<std::size_t>(g - 1)] = family.clamp(theta);
  }
  return state;
}

MixtureState em_init_impl(const FamilySpec& family, const ObsSet& obs,
                          const std::vector<double>& alpha0, const Theta& theta0,
                          const EmConfig& cfg) {
  Rng rng = Rng::stream(cfg.seed, 0x1e17u);
  MixtureState best;
  double best_pl = -kInf;
  const int init_cap = 50;
  for (int s = 0; s < cfg.inner_starts; ++s) {
    MixtureState seed = seed_state(family, obs, alpha0, theta0, s, rng);
    EmRun run = run_em(family, obs, std::move(seed), cfg.lambda, init_cap,
                       cfg.tol, /*freeze_alpha=*/true, false);
    if (run.pl > best_pl) {
      best_pl = run.pl;
      best = std::move(run.state);
    }
  }
  // Homogeneous candidate: a fixed point of the frozen-alpha EM, included so
  // the initialization never falls below the homogeneous fit.
  MixtureState homo;
  homo.alpha = alpha0;
  homo.xi.assign(static_cast<std::size_t>(cfg.G), theta0);
  EmRun run = run_em(family, obs, std::move(homo), cfg.lambda, 1, cfg.tol,
                     /*freeze_alpha=*/true, false);
  if (run.pl > best_pl) {
    best = std::move(run.state);
  }
  return best;
}

}  // namespace

void EmConfig::validate() const {
  if (G < 2) throw std::invalid_argument("EmConfig: G must be >= 2");
  if (K < 1) throw std::invalid_argument("EmConfig: K must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("EmConfig: lambda must be > 0");
  if (inner_starts < 1) throw std::invalid_argument("EmConfig: inner_starts must be >= 1");
  if (initials.empty()) throw std::invalid_argument("EmConfig: initials must not be empty");
  bool has_uniform = false;
  for (const auto& a : initials) {
    if (a.size() != static_cast<std::size_t>(G))
      throw std::invalid_argument("EmConfig: initial of wrong length");
    double sum = 0.0;
    double mn = 1.0;
    for (double x : a) {
      sum += x;
      mn = std::min(mn, x);
    }
    if (std::fabs(sum - 1.0) > 1e-9 || mn < 1e-4)
      throw std::invalid_argument("EmConfig: initial must be a simplex point with entries >= 1e-4");
    bool uniform = true;
    for (double x : a) {
      if (std::fabs(x - 1.0 / G) > 1e-12) uniform = false;
    }
    has_uniform = has_uniform || uniform;
  }
  if (!has_uniform)
    throw std::invalid_argument("EmConfig: the uniform vector must be among the initials");
}

std::vector<std::vector<double>> default_initials(int G, int t, std::uint64_t seed) {
  if (G < 2 || t < 1) throw std::invalid_argument("default_initials: need G >= 2, t >= 1");
  std::vector<std::vector<double>> out;
  out.push_back(std::vector<double>(static_cast<std::size_t>(G), 1.0 / G));
  Rng rng = Rng::stream(seed, 0xA1FAu);
  for (int i = 1; i < t; ++i) {
    std::vector<double> a(static_cast<std::size_t>(G));
    double sum = 0.0;
    for (double& x : a) {
      x = rng.gamma(1.0);
      sum += x;
    }
    double sum2 = 0.0;
    for (double& x : a) {
      x = std::max(x / sum, 0.05);
      sum2 += x;
    }
    for (double& x : a) x /= sum2;
    out.push_back(std::move(a));
  }
  return out;
}

double penalty(const std::vector<double>& alpha, double lambda) {
  const double G = static_cast<double>(alpha.size());
  double sum = 0.0;
  for (double a : alpha) {
    if (a < 0.0) throw std::domain_error("penalty: negative mixing proportion");
    if (a == 0.0) return -kInf;
    sum += std::log(a);
  }
  return lambda * (sum + G * std::log(G));
}

double penalized_loglik(const FamilySpec& family, const ObsSet& obs,
                        const MixtureState& state, double lambda) {
  std::vector<std::vector<double>> table;
  log_pdf_table(family, state.xi, obs, table);
  return mixture_loglik(table, state.alpha, obs, nullptr) + penalty(state.alpha, lambda);
}

double penalized_loglik(const FamilySpec& family, const std::vector<double>& xs,
                        const MixtureState& state, double lambda) {
  for (double x : xs) {
    if (!family.in_support(x)) throw std::domain_error("penalized_loglik: x outside the support");
  }
  for (const Theta& t : state.xi) {
    if (!family.in_bounds(t)) throw std::domain_error("penalized_loglik: theta outside the box");
  }
  if (xs.empty()) return penalty(state.alpha, lambda);
  return penalized_loglik(family, ObsSet::from_sample(xs), state, lambda);
}

std::vector<std::vector<double>> e_step(const FamilySpec& family,
                                        const std::vector<double>& xs,
                                        const MixtureState& state) {
  const std::size_t G = state.alpha.size();
  std::vector<double> la(G);
  for (std::size_t g = 0; g < G; ++g) la[g] = std::log(state.alpha[g]);
  std::vector<std::vector<double>> w(xs.size(), std::vector<double>(G));
  std::vector<double> term(G);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double mx = -kInf;
    for (std::size_t g = 0; g < G; ++g) {
      term[g] = la[g] + family.log_pdf(state.xi[g], xs[i]);
      if (term[g] > mx) mx = term[g];
    }
    double sum = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      term[g] = std::exp(term[g] - mx);
      sum += term[g];
    }
    for (std::size_t g = 0; g < G; ++g) w[i][g] = term[g] / sum;
  }
  return w;
}

std::vector<double> m_step_alpha(const std::vector<std::vector<double>>& weights,
                                 double lambda) {
  if (weights.empty()) throw std::invalid_argument("m_step_alpha: empty weights");
  const std::size_t G = weights.front().size();
  const double n = static_cast<double>(weights.size());
  std::vector<double> alpha(G, 0.0);
  for (const auto& row : weights) {
    for (std::size_t g = 0; g < G; ++g) alpha[g] += row[g];
  }
  for (std::size_t g = 0; g < G; ++g) {
    alpha[g] = (alpha[g] + lambda) / (n + static_cast<double>(G) * lambda);
  }
  return alpha;
}

std::vector<Theta> m_step_theta(const FamilySpec& family, const std::vector<double>& xs,
                                const std::vector<std::vector<double>>& weights) {
  if (weights.size() != xs.size()) throw std::invalid_argument("m_step_theta: size mismatch");
  const std::size_t G = weights.empty() ? 0 : weights.front().size();
  std::vector<Theta> xi(G);
  std::vector<double> col(xs.size());
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t i = 0; i < xs.size(); ++i) col[i] = weights[i][g];
    xi[g] = family.weighted_mle(xs, col).theta;
  }
  return xi;
}

MixtureState em_init(const FamilySpec& family, const std::vector<double>& xs,
                     const std::vector<double>& alpha0, const EmConfig& cfg) {
  const ObsSet obs = ObsSet::from_sample(xs);
  const FitResult fit0 = family.homogeneous_mle(xs);
  return em_init_impl(family, obs, alpha0, fit0.theta, cfg);
}

EmTestResult em_test_statistic(const FamilySpec& family, const std::vector<double>& xs,
                               const EmConfig& cfg, bool record_trace) {
  cfg.validate();
  if (xs.size() < static_cast<std::size_t>(2 * cfg.G))
    throw std::invalid_argument("em_test_statistic: need n >= 2G");
  for (double x : xs) {
    if (!family.in_support(x)) throw std::domain_error("em_test_statistic: x outside the support");
  }

  const ObsSet obs = ObsSet::from_sample(xs);
  const std::size_t T = cfg.initials.size();
  EmTestResult result;
  const FitResult fit0 = family.weighted_mle(obs);
  result.theta0_hat = fit0.theta;
  result.boundary_flag = fit0.clamped;

  if (obs.values.size() == 1) {
    // Constant column: the mixture fit cannot improve on the homogeneous one.
    result.statistic = 0.0;
    result.boundary_flag = true;
    result.per_initial_stats.assign(T, 0.0);
    result.iterations_used.assign(T, 0);
    result.best_state.alpha = cfg.initials.front();
    result.best_state.xi.assign(static_cast<std::size_t>(cfg.G), fit0.theta);
    if (record_trace) result.pl_trace.assign(T, {});
    return result;
  }

  const double pl0 = family.weighted_loglik(fit0.theta, obs);  // p(alpha_0) = 0

  result.per_initial_stats.resize(T);
  result.iterations_used.resize(T);
  if (record_trace) result.pl_trace.resize(T);
  double best_stat = -kInf;
  std::size_t best_t = 0;
  MixtureState best_state;
  for (std::size_t t = 0; t < T; ++t) {
    MixtureState init = em_init_impl(family, obs, cfg.initials[t], fit0.theta, cfg);
    EmRun run = run_em(family, obs, std::move(init), cfg.lambda, cfg.K, cfg.tol,
                       /*freeze_alpha=*/false, record_trace);
    result.per_initial_stats[t] = 2.0 * (run.pl - pl0);
    result.iterations_used[t] = run.iterations;
    if (record_trace) result.pl_trace[t] = std::move(run.trace);
    if (result.per_initial_stats[t] > best_stat) {
      best_stat = result.per_initial_stats[t];
      best_t = t;
      best_state = std::move(run.state);
    }
  }
  result.statistic = result.per_initial_stats[best_t];
  result.best_state = std::move(best_state);
  return result;
}

}  // namespace emscreen
