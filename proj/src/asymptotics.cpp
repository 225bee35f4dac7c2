#include "emscreen/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "emscreen/rng.hpp"
#include "emscreen/special.hpp"

namespace emscreen {

namespace {

int vech_dim(int d) { return d * (d + 1) / 2; }

// Diagonal entries first, then off-diagonals (h < l) in row order, matching
// the derivative-bundle layout.
Eigen::VectorXd vech(const Eigen::MatrixXd& V) {
  const int d = static_cast<int>(V.rows());
  Eigen::VectorXd v(vech_dim(d));
  int idx = 0;
  for (int h = 0; h < d; ++h) v(idx++) = V(h, h);
  for (int h = 0; h < d; ++h) {
    for (int l = h + 1; l < d; ++l) v(idx++) = V(h, l);
  }
  return v;
}

Eigen::MatrixXd unvech(const Eigen::VectorXd& v, int d) {
  Eigen::MatrixXd V(d, d);
  int idx = 0;
  for (int h = 0; h < d; ++h) V(h, h) = v(idx++);
  for (int h = 0; h < d; ++h) {
    for (int l = h + 1; l < d; ++l) {
      V(h, l) = v(idx);
      V(l, h) = v(idx);
      ++idx;
    }
  }
  return V;
}

int infer_d(int m) {
  for (int d = 1; d <= 64; ++d) {
    if (vech_dim(d) == m) return d;
  }
  throw std::invalid_argument("cone_sup: vector length is not d(d+1)/2");
}

// Objective and gradient of h(A) = 2 vech(AA')'w - vech(AA')' B vech(AA').
double cone_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& w,
                      const Eigen::MatrixXd& B, Eigen::MatrixXd* grad) {
  const int d = static_cast<int>(A.rows());
  const Eigen::MatrixXd V = A * A.transpose();
  const Eigen::VectorXd v = vech(V);
  const Eigen::VectorXd Bv = B * v;
  const double value = 2.0 * v.dot(w) - v.dot(Bv);
  if (grad) {
    const Eigen::VectorXd gv = 2.0 * (w - Bv);
    // Symmetric gradient matrix: dh = <Ghat, dV>_F with off-diagonals halved
    // because vech carries each once.
    Eigen::MatrixXd ghat(d, d);
    int idx = 0;
    for (int h = 0; h < d; ++h) ghat(h, h) = gv(idx++);
    for (int h = 0; h < d; ++h) {
      for (int l = h + 1; l < d; ++l) {
        ghat(h, l) = 0.5 * gv(idx);
        ghat(l, h) = 0.5 * gv(idx);
        ++idx;
      }
    }
    *grad = 2.0 * ghat * A;
  }
  return value;
}

// BFGS maximization over the entries of A, run as a standard inverse-Hessian
// BFGS minimization of the negated objective with backtracking line search.
double bfgs_max(Eigen::MatrixXd A, const Eigen::VectorXd& w, const Eigen::MatrixXd& B,
                Eigen::MatrixXd* arg_out) {
  const int d = static_cast<int>(A.rows());
  const int r = static_cast<int>(A.cols());
  const int n = d * r;
  Eigen::MatrixXd grad(d, r);
  double f = -cone_objective(A, w, B, &grad);
  Eigen::Map<Eigen::VectorXd> x(A.data(), n);
  Eigen::VectorXd g = -Eigen::Map<Eigen::VectorXd>(grad.data(), n);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  for (int it = 0; it < 200; ++it) {
    if (g.norm() < 1e-11 * (1.0 + std::fabs(f))) break;
    Eigen::VectorXd dir = -(H * g);
    double slope = dir.dot(g);
    if (slope >= 0.0) {
      H.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    const Eigen::VectorXd x_old = x;
    const Eigen::VectorXd g_old = g;
    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x = x_old + step * dir;
      f_new = -cone_objective(A, w, B, &grad);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      x = x_old;
      break;
    }
    g = -Eigen::Map<Eigen::VectorXd>(grad.data(), n);
    const Eigen::VectorXd s = x - x_old;
    const Eigen::VectorXd y = g - g_old;
    const double sy = s.dot(y);
    if (sy > 1e-14) {
      const Eigen::VectorXd Hy = H * y;
      const double yHy = y.dot(Hy);
      H += (sy + yHy) / (sy * sy) * (s * s.transpose());
      H -= (Hy * s.transpose() + s * Hy.transpose()) / sy;
    } else {
      H.setIdentity();
    }
    const double gained = f - f_new;
    f = f_new;
    if (gained < 1e-13 * (std::fabs(f) + 1.0)) break;
  }
  if (arg_out) *arg_out = A;
  return -f;
}

}  // namespace

BMatrices estimate_b_matrices(const FamilySpec& family, const Theta& theta0_hat,
                              const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("estimate_b_matrices: empty sample");
  const int d = family.dim();
  const int m = vech_dim(d);
  const std::size_t n = xs.size();

  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mean2 = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::VectorXd> b1(n), b2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const DerivBundle b = family.deriv_bundle(theta0_hat, xs[i]);
    b1[i] = Eigen::Map<const Eigen::VectorXd>(b.b1.data(), d);
    b2[i] = Eigen::Map<const Eigen::VectorXd>(b.b2.data(), m);
    mean1 += b1[i];
    mean2 += b2[i];
  }
  mean1 /= static_cast<double>(n);
  mean2 /= static_cast<double>(n);

  BMatrices out;
  out.B11 = Eigen::MatrixXd::Zero(d, d);
  out.B12 = Eigen::MatrixXd::Zero(d, m);
  out.B22 = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd c1 = b1[i] - mean1;
    const Eigen::VectorXd c2 = b2[i] - mean2;
    out.B11 += c1 * c1.transpose();
    out.B12 += c1 * c2.transpose();
    out.B22 += c2 * c2.transpose();
  }
  out.B11 /= static_cast<double>(n);
  out.B12 /= static_cast<double>(n);
  out.B22 /= static_cast<double>(n);
  // Symmetrize away accumulation noise.
  out.B11 = 0.5 * (out.B11 + out.B11.transpose()).eval();
  out.B22 = 0.5 * (out.B22 + out.B22.transpose()).eval();

  Eigen::MatrixXd B11 = out.B11;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B11);
  const double emax = es.eigenvalues().maxCoeff();
  const double emin = es.eigenvalues().minCoeff();
  if (!(emin > 0.0) || emax / emin > 1e12) {
    B11 += 1e-10 * Eigen::MatrixXd::Identity(d, d);
    out.singular_flag = true;
  }
  out.B22_tilde = out.B22 - out.B12.transpose() * B11.ldlt().solve(out.B12);
  out.B22_tilde = 0.5 * (out.B22_tilde + out.B22_tilde.transpose()).eval();
  return out;
}

double cone_sup(const Eigen::VectorXd& w, const Eigen::MatrixXd& B22_tilde, int r) {
  const int m = static_cast<int>(w.size());
  if (B22_tilde.rows() != m || B22_tilde.cols() != m)
    throw std::invalid_argument("cone_sup: dimension mismatch");
  if (r < 1) throw std::invalid_argument("cone_sup: r must be >= 1");
  const int d = infer_d(m);
  r = std::min(r, d);

  if (d == 1) {
    const double b = B22_tilde(0, 0);
    const double wp = std::max(w(0), 0.0);
    if (wp == 0.0) return 0.0;
    if (b <= 0.0) return std::numeric_limits<double>::infinity();
    return wp * wp / b;
  }

  double best = 0.0;  // v = 0 is always feasible

  // Unconstrained maximizer, feasible when PSD with small enough rank.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(B22_tilde);
  if (ldlt.info() == Eigen::Success) {
    const Eigen::VectorXd v_unc = ldlt.solve(w);
    const Eigen::MatrixXd V_unc = unvech(v_unc, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V_unc);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    int rank = 0;
    bool psd = true;
    for (int i = 0; i < d; ++i) {
      if (ev(i) < -1e-10 * scale) psd = false;
      if (ev(i) > 1e-10 * scale) ++rank;
    }
    if (psd && rank <= r) {
      best = std::max(best, w.dot(v_unc));
    }
  }

  // Seeded multi-start quasi-Newton on the factor parameterization.
  Rng rng = Rng::stream(0xC05EFu, static_cast<std::uint64_t>(m) * 131 + static_cast<std::uint64_t>(r));
  const double scale = std::sqrt(std::max(1.0, w.cwiseAbs().maxCoeff()) /
                                 std::max(1e-12, B22_tilde.diagonal().maxCoeff()));
  for (int start = 0; start < 10; ++start) {
    Eigen::MatrixXd A(d, r);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < r; ++j) A(i, j) = scale * rng.normal();
    }
    best = std::max(best, bfgs_max(A, w, B22_tilde, nullptr));
  }
  return best;
}

LimitSample sample_limit_dist(const Eigen::MatrixXd& B22_tilde, int r, int n_mc,
                              std::uint64_t seed, std::vector<Eigen::VectorXd>* keep_ws) {
  if (n_mc < 1) throw std::invalid_argument("sample_limit_dist: n_mc must be >= 1");
  const int m = static_cast<int>(B22_tilde.rows());

  // Factor L with L L' = B22_tilde; eigenvalue fallback covers semidefinite
  // input where Cholesky fails.
  Eigen::MatrixXd L;
  Eigen::LLT<Eigen::MatrixXd> llt(B22_tilde);
  if (llt.info() == Eigen::Success) {
    L = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B22_tilde);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    L = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  }

  Rng rng = Rng::stream(seed, 0x11417u);
  LimitSample sample;
  sample.r = r;
  sample.n_mc = n_mc;
  sample.draws.resize(static_cast<std::size_t>(n_mc));
  Eigen::VectorXd z(m);
  int zeros = 0;
  for (int i = 0; i < n_mc; ++i) {
    for (int j = 0; j < m; ++j) z(j) = rng.normal();
    const Eigen::VectorXd w = L * z;
    if (keep_ws) keep_ws->push_back(w);
    const double val = cone_sup(w, B22_tilde, r);
    sample.draws[static_cast<std::size_t>(i)] = val;
    if (val == 0.0) ++zeros;
  }
  std::sort(sample.draws.begin(), sample.draws.end());
  sample.zero_fraction = static_cast<double>(zeros) / static_cast<double>(n_mc);
  return sample;
}

double pvalue_chisq(double stat, int df) {
  if (df < 1) throw std::invalid_argument("pvalue_chisq: df must be >= 1");
  if (std::isnan(stat)) throw std::invalid_argument("pvalue_chisq: nan statistic");
  const double s = std::max(stat, 0.0);
  return gamma_q(0.5 * static_cast<double>(df), 0.5 * s);
}

double pvalue_montecarlo(double stat, const LimitSample& sample) {
  if (sample.draws.empty()) throw std::invalid_argument("pvalue_montecarlo: empty sample");
  const double s = std::max(stat, 0.0);
  const auto it = std::lower_bound(sample.draws.begin(), sample.draws.end(), s);
  const auto count = static_cast<double>(sample.draws.end() - it);
  return (1.0 + count) / (static_cast<double>(sample.draws.size()) + 1.0);
}

}  // namespace emscreen
