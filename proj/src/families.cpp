#include "emscreen/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "emscreen/special.hpp"

namespace emscreen {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_nonneg_int(double x) {
  return x >= 0.0 && std::isfinite(x) && std::floor(x) == x;
}

// Negative binomial log-pmf with mean mu and size r.
double nb_log_pmf(double mu, double r, double x) {
  const double t = r + mu;
  return std::lgamma(r + x) - std::lgamma(x + 1.0) - std::lgamma(r) +
         r * (std::log(r) - std::log(t)) + x * (std::log(mu) - std::log(t));
}

// Weighted NB log-likelihood in r with the mean profiled out, dropping the
// r-independent -sum w*lgamma(x+1) term. When the largest count is moderate
// the lgamma difference is expanded exactly as sum_k T_k log(r + k) with
// tail weights T_k = sum_{x > k} w, which avoids lgamma entirely.
class NbProfile {
 public:
  NbProfile(const ObsSet& obs, double mu) : obs_(obs), mu_(mu) {
    const double vmax = obs.values.empty() ? 0.0 : obs.values.back();
    use_tails_ = vmax <= 4.0 * static_cast<double>(obs.values.size()) + 64.0;
    if (use_tails_) {
      tails_.assign(static_cast<std::size_t>(vmax), 0.0);
      // T_k = total weight of observations strictly greater than k
      double tail = 0.0;
      std::size_t i = obs.values.size();
      long long k = static_cast<long long>(vmax) - 1;
      while (k >= 0) {
        while (i > 0 && obs.values[i - 1] > static_cast<double>(k)) {
          tail += obs.weights[--i];
        }
        tails_[static_cast<std::size_t>(k)] = tail;
        --k;
      }
    }
    for (std::size_t i = 0; i < obs.values.size(); ++i) {
      sum_x_ += obs.weights[i] * obs.values[i];
    }
  }

  double operator()(double log_r) const {
    const double r = std::exp(log_r);
    const double t = r + mu_;
    double ll = obs_.total * r * (std::log(r) - std::log(t)) +
                sum_x_ * (std::log(mu_) - std::log(t));
    if (use_tails_) {
      for (std::size_t k = 0; k < tails_.size(); ++k) {
        ll += tails_[k] * std::log(r + static_cast<double>(k));
      }
    } else {
      const double lgr = std::lgamma(r);
      for (std::size_t i = 0; i < obs_.values.size(); ++i) {
        ll += obs_.weights[i] * (std::lgamma(obs_.values[i] + r) - lgr);
      }
    }
    return ll;
  }

  // d/dr of the profiled log-likelihood (not d/d log r; the sign is the same).
  double slope(double log_r) const {
    const double r = std::exp(log_r);
    const double t = r + mu_;
    double der = obs_.total * (std::log(r / t) + mu_ / t) - sum_x_ / t;
    if (use_tails_) {
      for (std::size_t k = 0; k < tails_.size(); ++k) {
        der += tails_[k] / (r + static_cast<double>(k));
      }
    } else {
      const double dgr = digamma(r);
      for (std::size_t i = 0; i < obs_.values.size(); ++i) {
        der += obs_.weights[i] * (digamma(obs_.values[i] + r) - dgr);
      }
    }
    return der;
  }

 private:
  const ObsSet& obs_;
  double mu_;
  double sum_x_ = 0.0;
  bool use_tails_ = false;
  std::vector<double> tails_;
};

// Golden-section maximization on [lo, hi]; tol is absolute in the argument.
template <typename F>
double golden_max(const F& f, double lo, double hi, double tol, int max_iter) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

}  // namespace

std::string family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::negbin: return "negbin";
    case FamilyKind::normal: return "normal";
  }
  return "?";
}

FamilyKind family_from_name(const std::string& name) {
  if (name == "poisson") return FamilyKind::poisson;
  if (name == "negbin") return FamilyKind::negbin;
  if (name == "normal") return FamilyKind::normal;
  throw std::invalid_argument("unknown family: " + name);
}

ObsSet ObsSet::from_sample(const std::vector<double>& xs) {
  std::vector<double> ws(xs.size(), 1.0);
  return from_weighted(xs, ws);
}

ObsSet ObsSet::from_weighted(const std::vector<double>& xs, const std::vector<double>& ws) {
  if (xs.size() != ws.size()) throw std::invalid_argument("ObsSet: length mismatch");
  std::vector<std::size_t> idx(xs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  ObsSet o;
  for (std::size_t i : idx) {
    if (ws[i] < 0.0) throw std::invalid_argument("ObsSet: negative weight");
    if (ws[i] == 0.0) continue;
    if (!o.values.empty() && o.values.back() == xs[i]) {
      o.weights.back() += ws[i];
    } else {
      o.values.push_back(xs[i]);
      o.weights.push_back(ws[i]);
    }
    o.total += ws[i];
  }
  return o;
}

FamilySpec::FamilySpec(FamilyKind kind) : kind_(kind) {
  switch (kind) {
    case FamilyKind::poisson:
      d_ = 1;
      lo_ = {1e-6, 0.0};
      hi_ = {1e6, 0.0};
      break;
    case FamilyKind::negbin:
      d_ = 2;
      lo_ = {1e-6, 1e-3};
      hi_ = {1e6, 1e4};
      break;
    case FamilyKind::normal:
      d_ = 2;
      lo_ = {-1e6, 1e-8};
      hi_ = {1e6, 1e6};
      break;
  }
}

FamilySpec::FamilySpec(FamilyKind kind, const std::vector<double>& lo, const std::vector<double>& hi)
    : FamilySpec(kind) {
  if (lo.size() != static_cast<std::size_t>(d_) || hi.size() != static_cast<std::size_t>(d_))
    throw std::invalid_argument("FamilySpec: bounds dimension mismatch");
  for (int h = 0; h < d_; ++h) {
    const std::size_t k = static_cast<std::size_t>(h);
    if (!(std::isfinite(lo[k]) && std::isfinite(hi[k]) && lo[k] < hi[k]))
      throw std::invalid_argument("FamilySpec: bounds must be finite with lo < hi");
    lo_[k] = lo[k];
    hi_[k] = hi[k];
  }
  if (kind_ == FamilyKind::negbin && (lo_[0] <= 0.0 || lo_[1] <= 0.0))
    throw std::invalid_argument("FamilySpec: negbin bounds must be strictly positive");
  if (kind_ == FamilyKind::normal && lo_[1] <= 0.0)
    throw std::invalid_argument("FamilySpec: normal variance bound must be positive");
  if (kind_ == FamilyKind::poisson && lo_[0] <= 0.0)
    throw std::invalid_argument("FamilySpec: poisson bound must be positive");
}

bool FamilySpec::in_bounds(const Theta& theta) const {
  for (int h = 0; h < d_; ++h) {
    const std::size_t k = static_cast<std::size_t>(h);
    if (!(theta[k] >= lo_[k] && theta[k] <= hi_[k])) return false;
  }
  return true;
}

bool FamilySpec::in_support(double x) const {
  if (kind_ == FamilyKind::normal) return std::isfinite(x);
  return is_nonneg_int(x);
}

Theta FamilySpec::clamp(const Theta& theta, bool* touched) const {
  Theta out = theta;
  bool moved = false;
  for (int h = 0; h < d_; ++h) {
    const std::size_t k = static_cast<std::size_t>(h);
    double v = out[k];
    if (!(v >= lo_[k])) {
      v = lo_[k];
      moved = true;
    }
    if (!(v <= hi_[k])) {
      v = hi_[k];
      moved = true;
    }
    out[k] = v;
  }
  if (touched) *touched = moved;
  return out;
}

double FamilySpec::log_pdf_raw(const Theta& theta, double x) const {
  switch (kind_) {
    case FamilyKind::poisson:
      return -theta[0] + x * std::log(theta[0]) - std::lgamma(x + 1.0);
    case FamilyKind::negbin:
      return nb_log_pmf(theta[0], theta[1], x);
    case FamilyKind::normal: {
      const double diff = x - theta[0];
      return -0.5 * std::log(kTwoPi * theta[1]) - 0.5 * diff * diff / theta[1];
    }
  }
  return 0.0;
}

double FamilySpec::log_pdf(const Theta& theta, double x) const {
  if (!in_support(x)) throw std::domain_error("log_pdf: x outside the support");
  if (!in_bounds(theta)) throw std::domain_error("log_pdf: theta outside the parameter box");
  return log_pdf_raw(theta, x);
}

DerivBundle FamilySpec::deriv_bundle(const Theta& theta0, double x) const {
  if (!in_support(x)) throw std::domain_error("deriv_bundle: x outside the support");
  if (!in_bounds(theta0)) throw std::domain_error("deriv_bundle: theta outside the parameter box");
  DerivBundle b;
  switch (kind_) {
    case FamilyKind::poisson: {
      const double t = theta0[0];
      const double y = x / t - 1.0;
      b.b1 = {y};
      b.b2 = {0.5 * (y * y - x / (t * t))};
      break;
    }
    case FamilyKind::negbin: {
      const double mu = theta0[0], r = theta0[1];
      const double t = r + mu;
      const double dmu = x / mu - (r + x) / t;
      const double dr = digamma(r + x) - digamma(r) + std::log(r) + 1.0 -
                        std::log(t) - (r + x) / t;
      const double dmu2 = -x / (mu * mu) + (r + x) / (t * t);
      const double dmudr = (x - mu) / (t * t);
      const double dr2 = trigamma(r + x) - trigamma(r) + 1.0 / r - 1.0 / t -
                         (mu - x) / (t * t);
      b.b1 = {dmu, dr};
      b.b2 = {0.5 * (dmu * dmu + dmu2), 0.5 * (dr * dr + dr2), dmu * dr + dmudr};
      break;
    }
    case FamilyKind::normal: {
      const double mu = theta0[0], s = theta0[1];
      const double diff = x - mu;
      const double dmu = diff / s;
      const double ds = -0.5 / s + 0.5 * diff * diff / (s * s);
      const double dmu2 = -1.0 / s;
      const double dmuds = -diff / (s * s);
      const double ds2 = 0.5 / (s * s) - diff * diff / (s * s * s);
      b.b1 = {dmu, ds};
      b.b2 = {0.5 * (dmu * dmu + dmu2), 0.5 * (ds * ds + ds2), dmu * ds + dmuds};
      break;
    }
  }
  return b;
}

FitResult FamilySpec::weighted_mle(const std::vector<double>& xs, const std::vector<double>& ws) const {
  for (double x : xs) {
    if (!in_support(x)) throw std::domain_error("weighted_mle: x outside the support");
  }
  return weighted_mle(ObsSet::from_weighted(xs, ws));
}

FitResult FamilySpec::weighted_mle(const ObsSet& obs) const {
  if (!(obs.total > 0.0)) throw std::invalid_argument("weighted_mle: total weight must be > 0");
  double sx = 0.0;
  for (std::size_t i = 0; i < obs.values.size(); ++i) sx += obs.weights[i] * obs.values[i];
  const double mean = sx / obs.total;
  const bool single_value = obs.values.size() == 1;

  FitResult fit;
  switch (kind_) {
    case FamilyKind::poisson: {
      fit.theta = clamp(Theta(mean), &fit.clamped);
      break;
    }
    case FamilyKind::normal: {
      double sv = 0.0;
      for (std::size_t i = 0; i < obs.values.size(); ++i) {
        const double diff = obs.values[i] - mean;
        sv += obs.weights[i] * diff * diff;
      }
      fit.theta = clamp(Theta(mean, sv / obs.total), &fit.clamped);
      break;
    }
    case FamilyKind::negbin: {
      bool mu_clamped = false;
      const Theta mu_only = clamp(Theta(mean, lo_[1]), &mu_clamped);
      const double mu = mu_only[0];
      if (single_value) {
        // All mass on one value: the likelihood pushes r to a box edge
        // (Poisson limit for a positive value, r -> 0 degeneracy at zero).
        const double r = obs.values[0] > 0.0 ? hi_[1] : lo_[1];
        fit.theta = Theta(mu, r);
        fit.clamped = true;
        break;
      }
      // Weights normalized to total 1 so the search path cannot depend on
      // the weight scale.
      ObsSet norm;
      norm.values = obs.values;
      norm.weights.resize(obs.weights.size());
      for (std::size_t i = 0; i < obs.weights.size(); ++i)
        norm.weights[i] = obs.weights[i] / obs.total;
      norm.total = 1.0;
      NbProfile profile(norm, mu);
      const double tlo = std::log(lo_[1]);
      const double thi = std::log(hi_[1]);
      double t_hat;
      bool r_clamped = false;
      if (profile.slope(tlo) <= 0.0) {
        t_hat = tlo;
        r_clamped = true;
      } else if (profile.slope(thi) >= 0.0) {
        t_hat = thi;
        r_clamped = true;
      } else {
        // Golden-section localization, then bisection on the derivative sign
        // down to a reproducible root (plain golden section leaves ~1e-7
        // argument noise from near-tie comparisons).
        const double tg = golden_max(profile, tlo, thi, 1e-2, 200);
        double a = std::max(tlo, tg - 4e-2);
        double b = std::min(thi, tg + 4e-2);
        if (!(profile.slope(a) > 0.0 && profile.slope(b) < 0.0)) {
          a = tlo;
          b = thi;
        }
        while (b - a > 1e-13) {
          const double mid = 0.5 * (a + b);
          (profile.slope(mid) > 0.0 ? a : b) = mid;
        }
        t_hat = 0.5 * (a + b);
      }
      bool box_clamped = false;
      fit.theta = clamp(Theta(mu, std::exp(t_hat)), &box_clamped);
      fit.clamped = mu_clamped || r_clamped || box_clamped;
      break;
    }
  }
  return fit;
}

FitResult FamilySpec::homogeneous_mle(const std::vector<double>& xs) const {
  for (double x : xs) {
    if (!in_support(x)) throw std::domain_error("homogeneous_mle: x outside the support");
  }
  return weighted_mle(ObsSet::from_sample(xs));
}

double FamilySpec::weighted_loglik(const Theta& theta, const ObsSet& obs) const {
  double ll = 0.0;
  for (std::size_t i = 0; i < obs.values.size(); ++i) {
    ll += obs.weights[i] * log_pdf_raw(theta, obs.values[i]);
  }
  return ll;
}

}  // namespace emscreen
