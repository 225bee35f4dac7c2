#ifndef EMSCREEN_EMTEST_HPP
#define EMSCREEN_EMTEST_HPP

#include <cstdint>
#include <vector>

#include "emscreen/families.hpp"

namespace emscreen {

// One mixture iterate: G component parameters plus mixing proportions.
struct MixtureState {
  std::vector<Theta> xi;
  std::vector<double> alpha;

  int components() const { return static_cast<int>(alpha.size()); }
};

struct EmConfig {
  int G = 5;
  int K = 100;                  // max EM updates after initialization
  double lambda = 1e-5;         // mixing-proportion penalty weight
  std::vector<std::vector<double>> initials;  // always contains the uniform vector
  int inner_starts = 3;         // quantile-seeded candidates for the init fit
  double tol = 1e-8;            // relative improvement for early stop
  std::uint64_t seed = 1;

  void validate() const;
};

// Uniform vector plus (t - 1) seeded Dirichlet(1,...,1) draws floored at 0.05
// and renormalized.
std::vector<std::vector<double>> default_initials(int G, int t, std::uint64_t seed);

struct EmTestResult {
  double statistic = 0.0;                  // max over initials
  Theta theta0_hat;                        // homogeneous fit
  MixtureState best_state;
  std::vector<double> per_initial_stats;
  std::vector<int> iterations_used;        // main EM updates per initial
  bool boundary_flag = false;

  // Penalized log-likelihood trace per initial (init value plus one entry
  // per EM update); filled when EmConfig trace recording is requested via
  // em_test_statistic's record_trace argument.
  std::vector<std::vector<double>> pl_trace;
};

// p(alpha) = lambda * (sum_g log alpha_g + G log G); 0 at the uniform vector.
double penalty(const std::vector<double>& alpha, double lambda);

// sum_i log sum_g alpha_g f(x_i; theta_g) + p(alpha), log-sum-exp over
// components.
double penalized_loglik(const FamilySpec& family, const std::vector<double>& xs,
                        const MixtureState& state, double lambda);
double penalized_loglik(const FamilySpec& family, const ObsSet& obs,
                        const MixtureState& state, double lambda);

// Posterior component weights, one row per observation; rows sum to 1.
std::vector<std::vector<double>> e_step(const FamilySpec& family,
                                        const std::vector<double>& xs,
                                        const MixtureState& state);

// Closed-form penalized update: alpha_g = (sum_i w_gi + lambda)/(n + G lambda).
std::vector<double> m_step_alpha(const std::vector<std::vector<double>>& weights,
                                 double lambda);

// Per-component weighted MLE.
std::vector<Theta> m_step_theta(const FamilySpec& family, const std::vector<double>& xs,
                                const std::vector<std::vector<double>>& weights);

// Best-of-multistart fit of the component parameters with the proportions
// frozen at alpha0.
MixtureState em_init(const FamilySpec& family, const std::vector<double>& xs,
                     const std::vector<double>& alpha0, const EmConfig& cfg);

// The EM-test statistic for one feature: twice the gap between the K-step
// penalized-EM mixture fit (best over initials) and the penalized
// homogeneous fit.
EmTestResult em_test_statistic(const FamilySpec& family, const std::vector<double>& xs,
                               const EmConfig& cfg, bool record_trace = false);

}  // namespace emscreen

#endif
