#ifndef EMSCREEN_ASYMPTOTICS_HPP
#define EMSCREEN_ASYMPTOTICS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "emscreen/families.hpp"

namespace emscreen {

// Covariance blocks of the derivative bundle at the homogeneous fit.
// m = d(d+1)/2 throughout; B22_tilde = B22 - B21 B11^{-1} B12.
struct BMatrices {
  Eigen::MatrixXd B11;        // d x d
  Eigen::MatrixXd B12;        // d x m
  Eigen::MatrixXd B22;        // m x m
  Eigen::MatrixXd B22_tilde;  // m x m
  bool singular_flag = false; // B11 needed regularization before inversion
};

// Monte-Carlo draws of the limiting supremum, sorted ascending.
struct LimitSample {
  std::vector<double> draws;
  int r = 1;
  int n_mc = 0;
  double zero_fraction = 0.0;
};

// Empirical covariance blocks of {b_i} over the sample, centered at the
// empirical means; B11 gets a 1e-10 ridge when its condition number exceeds
// 1e12.
BMatrices estimate_b_matrices(const FamilySpec& family, const Theta& theta0_hat,
                              const std::vector<double>& xs);

// sup over vech(V), V symmetric PSD with rank <= r, of 2 v'w - v' B v.
// Solved through the V = A A' parameterization with seeded multi-start BFGS
// plus the analytic candidates v = 0 and the unconstrained maximizer when it
// is feasible.
double cone_sup(const Eigen::VectorXd& w, const Eigen::MatrixXd& B22_tilde, int r);

// Draws w ~ N(0, B22_tilde) (Cholesky, eigenvalue fallback for semidefinite
// input) and maps each through cone_sup. keep_ws, when given, receives the
// generated normal vectors in draw order.
LimitSample sample_limit_dist(const Eigen::MatrixXd& B22_tilde, int r, int n_mc,
                              std::uint64_t seed,
                              std::vector<Eigen::VectorXd>* keep_ws = nullptr);

// Survival function of chi-square(df); negative statistics are floored at 0.
double pvalue_chisq(double stat, int df);

// Add-one Monte-Carlo p-value (1 + #{draws >= stat}) / (n_mc + 1).
double pvalue_montecarlo(double stat, const LimitSample& sample);

}  // namespace emscreen

#endif
