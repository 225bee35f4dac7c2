#ifndef EMSCREEN_SPECIAL_HPP
#define EMSCREEN_SPECIAL_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace emscreen {

// Digamma via recurrence to x >= 6 plus the asymptotic series.
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: x must be > 0");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double ix = 1.0 / x;
  const double ix2 = ix * ix;
  result += std::log(x) - 0.5 * ix -
            ix2 * (1.0 / 12.0 - ix2 * (1.0 / 120.0 - ix2 / 252.0));
  return result;
}

// Trigamma, same scheme.
inline double trigamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("trigamma: x must be > 0");
  double result = 0.0;
  while (x < 6.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double ix = 1.0 / x;
  const double ix2 = ix * ix;
  result += ix + 0.5 * ix2 +
            ix2 * ix * (1.0 / 6.0 - ix2 * (1.0 / 30.0 - ix2 / 42.0));
  return result;
}

// Regularized lower incomplete gamma P(a, x) by its power series (x < a+1).
inline double gamma_p_series(double a, double x) {
  const double gln = std::lgamma(a);
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - gln);
  }
  return sum * std::exp(-x + a * std::log(x) - gln);
}

// Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction
// (x >= a+1).
inline double gamma_q_cf(double a, double x) {
  const double gln = std::lgamma(a);
  const double fpmin = std::numeric_limits<double>::min() / 1e-16;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || std::isnan(x))
    throw std::invalid_argument("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

}  // namespace emscreen

#endif
