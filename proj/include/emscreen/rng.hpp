#ifndef EMSCREEN_RNG_HPP
#define EMSCREEN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace emscreen {

// splitmix64: a counter-based 64-bit generator. The state advances by a
// fixed increment and each output is a finalizer of the counter, so a
// stream is fully determined by (seed, number of draws) on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Derive an independent stream from a base seed and a stream id.
  static Rng stream(std::uint64_t seed, std::uint64_t id) {
    return Rng(mix(seed) ^ mix(mix(id) + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Standard normal via the Marsaglia polar method; the spare is discarded
  // so each call consumes a self-contained run of uniforms.
  double normal() {
    for (;;) {
      const double u = 2.0 * u01() - 1.0;
      const double v = 2.0 * u01() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = 1.0 - u01();  // in (0, 1]
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = 1.0 - u01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Exact Poisson sampling: Knuth's product method on chunks of mean <= 30,
  // using Poisson(a + b) = Poisson(a) + Poisson(b).
  long long poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    long long total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

  // NB(mu, r) as a Gamma(r, mu/r) mixture of Poissons.
  long long negbin(double mu, double r) {
    if (!(mu >= 0.0) || !(r > 0.0)) throw std::invalid_argument("negbin: need mu >= 0, r > 0");
    if (mu == 0.0) return 0;
    return poisson(gamma(r) * (mu / r));
  }

  // Hypergeometric: number of marked items among n draws without replacement
  // from N items of which K are marked. Inverse-CDF on the full support.
  long long hypergeom(long long N, long long K, long long n) {
    if (N < 0 || K < 0 || K > N || n < 0 || n > N)
      throw std::invalid_argument("hypergeom: invalid parameters");
    const long long klo = std::max(0LL, n - (N - K));
    const long long khi = std::min(K, n);
    std::vector<double> logp(static_cast<std::size_t>(khi - klo + 1));
    double lmax = -1e308;
    for (long long k = klo; k <= khi; ++k) {
      const double lp = lchoose(K, k) + lchoose(N - K, n - k) - lchoose(N, n);
      logp[static_cast<std::size_t>(k - klo)] = lp;
      if (lp > lmax) lmax = lp;
    }
    double tot = 0.0;
    for (double& lp : logp) {
      lp = std::exp(lp - lmax);
      tot += lp;
    }
    const double u = u01() * tot;
    double acc = 0.0;
    for (std::size_t i = 0; i < logp.size(); ++i) {
      acc += logp[i];
      if (u < acc) return klo + static_cast<long long>(i);
    }
    return khi;
  }

  // Index in [0, probs.size()) with the given probabilities (need not be
  // perfectly normalized).
  std::size_t categorical(const std::vector<double>& probs) {
    double tot = 0.0;
    for (double p : probs) tot += p;
    const double u = u01() * tot;
    double acc = 0.0;
    for (std::size_t g = 0; g + 1 < probs.size(); ++g) {
      acc += probs[g];
      if (u < acc) return g;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

 private:
  long long poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    long long k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= u01();
    } while (prod > limit);
    return k - 1;
  }

  static double lchoose(long long n, long long k) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
  }

  std::uint64_t state_;
};

}  // namespace emscreen

#endif
