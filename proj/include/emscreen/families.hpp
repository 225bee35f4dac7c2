#ifndef EMSCREEN_FAMILIES_HPP
#define EMSCREEN_FAMILIES_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace emscreen {

enum class FamilyKind { poisson, negbin, normal };

std::string family_name(FamilyKind kind);
FamilyKind family_from_name(const std::string& name);

// Parameter vector of a family member; only the first d entries are used.
struct Theta {
  std::array<double, 2> v{0.0, 0.0};

  Theta() = default;
  Theta(double a) : v{a, 0.0} {}
  Theta(double a, double b) : v{a, b} {}
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
};

// First- and second-order density-derivative ratios at a fixed parameter:
// b1[h]   = (d f / d theta_h) / f
// b2[h]   = (d^2 f / d theta_h^2) / (2 f)          for h < d (diagonal terms)
// b2[d..] = (d^2 f / d theta_h d theta_l) / f      for h < l, row order
struct DerivBundle {
  std::vector<double> b1;
  std::vector<double> b2;
};

struct FitResult {
  Theta theta;
  bool clamped = false;  // some coordinate was pushed onto the parameter box
};

// Sample compressed to sorted distinct values with positive weights.
// For count data this is a histogram; for continuous data runs of equal
// values are still merged, which keeps every downstream sum independent of
// the original sample order.
struct ObsSet {
  std::vector<double> values;   // strictly increasing
  std::vector<double> weights;  // > 0, same length
  double total = 0.0;           // sum of weights

  static ObsSet from_sample(const std::vector<double>& xs);
  static ObsSet from_weighted(const std::vector<double>& xs, const std::vector<double>& ws);
};

// A parametric density family with box-constrained parameters.
class FamilySpec {
 public:
  explicit FamilySpec(FamilyKind kind);
  FamilySpec(FamilyKind kind, const std::vector<double>& lo, const std::vector<double>& hi);

  FamilyKind kind() const { return kind_; }
  int dim() const { return d_; }
  bool is_count() const { return kind_ != FamilyKind::normal; }
  double lo(int h) const { return lo_[static_cast<std::size_t>(h)]; }
  double hi(int h) const { return hi_[static_cast<std::size_t>(h)]; }

  bool in_bounds(const Theta& theta) const;
  bool in_support(double x) const;
  Theta clamp(const Theta& theta, bool* touched = nullptr) const;

  // log f(x; theta); throws on x outside the support or theta off the box.
  double log_pdf(const Theta& theta, double x) const;

  // Density-derivative ratios at theta0 (closed forms per family).
  DerivBundle deriv_bundle(const Theta& theta0, double x) const;

  // argmax_theta sum_i w_i log f(x_i; theta), clamped to the box.
  FitResult weighted_mle(const std::vector<double>& xs, const std::vector<double>& ws) const;
  FitResult weighted_mle(const ObsSet& obs) const;

  // Plain MLE (unit weights).
  FitResult homogeneous_mle(const std::vector<double>& xs) const;

  // Unchecked log-density used by the EM hot loop; theta assumed in bounds
  // and x in support.
  double log_pdf_raw(const Theta& theta, double x) const;

  double weighted_loglik(const Theta& theta, const ObsSet& obs) const;

 private:
  FamilyKind kind_;
  int d_;
  std::array<double, 2> lo_{0.0, 0.0};
  std::array<double, 2> hi_{0.0, 0.0};
};

}  // namespace emscreen

#endif
