#include "emscreen/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "emscreen/rng.hpp"

namespace emscreen {

std::vector<double> SimScenario::alpha_true() const {
  if (family_kind == FamilyKind::normal && balanced)
    return std::vector<double>(static_cast<std::size_t>(G), 1.0 / G);
  std::vector<double> a(static_cast<std::size_t>(G), 0.125);
  a[0] = 0.5;
  return a;
}

std::string SimScenario::case_id() const {
  if (family_kind == FamilyKind::normal)
    return balanced ? "normal-balanced" : "normal-unbalanced";
  std::string sig = signal == SignalLevel::low ? "low" : signal == SignalLevel::med ? "med" : "high";
  std::string noi = noise == NoiseLevel::low ? "low" : "high";
  return "nb-" + sig + "-" + noi;
}

SimScenario SimScenario::from_case_id(const std::string& id, std::size_t p, std::size_t n,
                                      std::uint64_t seed) {
  SimScenario sc;
  sc.p = p;
  sc.n = n;
  sc.seed = seed;
  if (id == "normal-balanced") {
    sc.family_kind = FamilyKind::normal;
    sc.balanced = true;
    return sc;
  }
  if (id == "normal-unbalanced") {
    sc.family_kind = FamilyKind::normal;
    sc.balanced = false;
    return sc;
  }
  // nb-<signal>-<noise>
  if (id.rfind("nb-", 0) == 0) {
    const std::string rest = id.substr(3);
    const std::size_t dash = rest.find('-');
    if (dash != std::string::npos) {
      const std::string sig = rest.substr(0, dash);
      const std::string noi = rest.substr(dash + 1);
      sc.family_kind = FamilyKind::negbin;
      if (sig == "low") sc.signal = SignalLevel::low;
      else if (sig == "med") sc.signal = SignalLevel::med;
      else if (sig == "high") sc.signal = SignalLevel::high;
      else throw std::invalid_argument("unknown case id: " + id);
      if (noi == "low") sc.noise = NoiseLevel::low;
      else if (noi == "high") sc.noise = NoiseLevel::high;
      else throw std::invalid_argument("unknown case id: " + id);
      return sc;
    }
  }
  throw std::invalid_argument("unknown case id: " + id);
}

void SimScenario::validate() const {
  if (G != 5) throw std::invalid_argument("SimScenario: benchmark cases use G = 5");
  if (s == 0 || s % 5 != 0) throw std::invalid_argument("SimScenario: s must be a positive multiple of 5");
  if (p < s) throw std::invalid_argument("SimScenario: p must be >= s");
  if (n < 2) throw std::invalid_argument("SimScenario: n must be >= 2");
  if (family_kind == FamilyKind::poisson)
    throw std::invalid_argument("SimScenario: benchmark cases are negbin or normal");
}

namespace {

// Relevant features come in blocks of five; block k elevates cluster k + 2
// (wrapping over the non-reference clusters when s > 20).
int elevated_cluster(std::size_t j0, int G) {
  const std::size_t block = j0 / 5;
  return 2 + static_cast<int>(block % static_cast<std::size_t>(G - 1));
}

SimDataset gen_core(const SimScenario& scenario) {
  scenario.validate();
  const std::size_t n = scenario.n, p = scenario.p, s = scenario.s;
  const int G = scenario.G;
  const bool normal = scenario.family_kind == FamilyKind::normal;
  const std::vector<double> alpha = scenario.alpha_true();

  Rng rng(Rng::mix(scenario.seed) ^ 0x5157eedULL);

  SimDataset ds;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = static_cast<int>(rng.categorical(alpha)) + 1;
  }

  double noise_lo = 0.0, noise_hi = 0.0, sig_lo = 0.0, sig_hi = 0.0;
  double base_lo = 0.0, base_hi = 0.0;
  if (normal) {
    if (scenario.balanced) {
      noise_lo = 1.0; noise_hi = 1.5;
      sig_lo = 10.0; sig_hi = 11.0;
    } else {
      noise_lo = 1.0; noise_hi = 2.0;
      sig_lo = 3.0; sig_hi = 4.0;
    }
    base_lo = -5.0; base_hi = 5.0;
  } else {
    noise_lo = scenario.noise == NoiseLevel::low ? 10.0 : 5.0;
    noise_hi = noise_lo + 1.0;
    switch (scenario.signal) {
      case SignalLevel::low:  sig_lo = 5.0; sig_hi = 6.0; break;
      case SignalLevel::med:  sig_lo = 7.0; sig_hi = 8.0; break;
      case SignalLevel::high: sig_lo = 9.0; sig_hi = 10.0; break;
    }
    base_lo = std::log(2.0);
    base_hi = std::log(5.0);
  }

  ds.truth.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    FeatureTruth& t = ds.truth[j];
    t.r_or_sigma = rng.uniform(noise_lo, noise_hi);
    t.u = rng.uniform(base_lo, base_hi);
    const bool relevant = j < s;
    if (relevant) {
      t.D = rng.uniform(sig_lo, sig_hi);
      t.elevated = elevated_cluster(j, G);
    }
    const double base_mean = normal ? t.u : std::exp(t.u);
    t.mu.assign(static_cast<std::size_t>(G), base_mean);
    if (relevant) t.mu[static_cast<std::size_t>(t.elevated - 1)] = base_mean + t.D;
  }
  for (std::size_t j = 0; j < s; ++j) ds.relevant.push_back(j + 1);

  ds.data.n = n;
  ds.data.p = p;
  ds.data.kind = normal ? DataKind::continuous : DataKind::count;
  ds.data.values.resize(n * p);
  ds.data.feature_names.resize(p);
  for (std::size_t j = 0; j < p; ++j) ds.data.feature_names[j] = "f" + std::to_string(j + 1);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = static_cast<std::size_t>(ds.labels[i] - 1);
    for (std::size_t j = 0; j < p; ++j) {
      const FeatureTruth& t = ds.truth[j];
      const double mu = t.mu[g];
      double x;
      if (normal) {
        x = mu + t.r_or_sigma * rng.normal();
      } else {
        x = static_cast<double>(rng.negbin(mu, t.r_or_sigma));
      }
      ds.data.values[i * p + j] = x;
    }
  }
  return ds;
}

}  // namespace

SimDataset gen_nb_case(const SimScenario& scenario) {
  if (scenario.family_kind != FamilyKind::negbin)
    throw std::invalid_argument("gen_nb_case: scenario is not a negbin case");
  return gen_core(scenario);
}

SimDataset gen_normal_case(const SimScenario& scenario) {
  if (scenario.family_kind != FamilyKind::normal)
    throw std::invalid_argument("gen_normal_case: scenario is not a normal case");
  return gen_core(scenario);
}

SimDataset generate(const SimScenario& scenario) {
  return scenario.family_kind == FamilyKind::normal ? gen_normal_case(scenario)
                                                     : gen_nb_case(scenario);
}

}  // namespace emscreen
