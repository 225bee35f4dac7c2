#include <doctest.h>

#include <cmath>
#include <vector>

#include "emscreen/families.hpp"
#include "emscreen/rng.hpp"
#include "oracles.hpp"

using namespace emscreen;

namespace {

int kind_index(FamilyKind k) {
  return k == FamilyKind::poisson ? 0 : k == FamilyKind::negbin ? 1 : 2;
}

Theta random_interior_theta(FamilyKind kind, Rng& rng) {
  switch (kind) {
    case FamilyKind::poisson:
      return Theta(rng.uniform(0.3, 20.0));
    case FamilyKind::negbin:
      return Theta(rng.uniform(0.5, 15.0), rng.uniform(0.5, 30.0));
    case FamilyKind::normal:
      return Theta(rng.uniform(-5.0, 5.0), rng.uniform(0.3, 9.0));
  }
  return Theta(1.0);
}

double random_support_x(FamilyKind kind, const Theta& theta, Rng& rng) {
  switch (kind) {
    case FamilyKind::poisson:
      return static_cast<double>(rng.poisson(theta[0]));
    case FamilyKind::negbin:
      return static_cast<double>(rng.negbin(theta[0], theta[1]));
    case FamilyKind::normal:
      return theta[0] + std::sqrt(theta[1]) * rng.normal();
  }
  return 0.0;
}

}  // namespace

TEST_CASE("log_pdf closed-form values") {
  const FamilySpec nb(FamilyKind::negbin);
  CHECK(nb.log_pdf(Theta(2.0, 3.0), 0.0) == doctest::Approx(3.0 * std::log(0.6)).epsilon(1e-12));
  const FamilySpec pois(FamilyKind::poisson);
  CHECK(pois.log_pdf(Theta(1.0), 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
  const FamilySpec norm(FamilyKind::normal);
  CHECK(norm.log_pdf(Theta(0.0, 1.0), 0.0) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("log_pdf domain errors") {
  const FamilySpec pois(FamilyKind::poisson);
  CHECK_THROWS_AS(pois.log_pdf(Theta(1.0), -1.0), std::domain_error);
  CHECK_THROWS_AS(pois.log_pdf(Theta(1.0), 0.5), std::domain_error);
  CHECK_THROWS_AS(pois.log_pdf(Theta(0.0), 1.0), std::domain_error);
  const FamilySpec nb(FamilyKind::negbin);
  CHECK_THROWS_AS(nb.log_pdf(Theta(2.0, 0.0), 1.0), std::domain_error);
  const FamilySpec norm(FamilyKind::normal);
  CHECK_THROWS_AS(norm.log_pdf(Theta(0.0, 1.0), std::nan("")), std::domain_error);
}

TEST_CASE("deriv_bundle poisson closed forms") {
  const FamilySpec pois(FamilyKind::poisson);
  const DerivBundle at_mean = pois.deriv_bundle(Theta(3.0), 3.0);
  CHECK(at_mean.b1[0] == doctest::Approx(0.0).epsilon(1e-14));
  const DerivBundle at_zero = pois.deriv_bundle(Theta(2.0), 0.0);
  CHECK(at_zero.b1[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(at_zero.b2[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("deriv_bundle negbin matches finite differences") {
  const FamilySpec nb(FamilyKind::negbin);
  const DerivBundle b = nb.deriv_bundle(Theta(2.0, 3.0), 1.0);
  const oracle::FdBundle fd = oracle::fd_bundle(1, {2.0, 3.0}, 1.0);
  CHECK(b.b1[0] == doctest::Approx(fd.b1[0]).epsilon(1e-5));
  CHECK(b.b1[1] == doctest::Approx(fd.b1[1]).epsilon(1e-5));
  CHECK(b.b2[0] == doctest::Approx(fd.b2[0]).epsilon(1e-5));
  CHECK(b.b2[1] == doctest::Approx(fd.b2[1]).epsilon(1e-5));
  CHECK(b.b2[2] == doctest::Approx(fd.b2[2]).epsilon(1e-5));
}

TEST_CASE("deriv_bundle matches finite differences on random interior points") {
  Rng rng(20240811);
  for (FamilyKind kind : {FamilyKind::poisson, FamilyKind::negbin, FamilyKind::normal}) {
    const FamilySpec family(kind);
    const int d = family.dim();
    for (int rep = 0; rep < 200; ++rep) {
      const Theta theta = random_interior_theta(kind, rng);
      const double x = random_support_x(kind, theta, rng);
      const DerivBundle b = family.deriv_bundle(theta, x);
      std::vector<double> tv(theta.v.begin(), theta.v.begin() + d);
      const oracle::FdBundle fd = oracle::fd_bundle(kind_index(kind), tv, x);
      for (int h = 0; h < d; ++h) {
        const double ref = fd.b1[static_cast<std::size_t>(h)];
        CHECK(b.b1[static_cast<std::size_t>(h)] ==
              doctest::Approx(ref).epsilon(1e-5).scale(std::max(1.0, std::fabs(ref))));
      }
      for (int h = 0; h < d; ++h) {
        const double ref = fd.b2[static_cast<std::size_t>(h)];
        CHECK(b.b2[static_cast<std::size_t>(h)] ==
              doctest::Approx(ref).epsilon(1e-5).scale(std::max(1.0, std::fabs(ref))));
      }
      for (std::size_t k = static_cast<std::size_t>(d); k < b.b2.size(); ++k) {
        const double ref = fd.b2[k];
        CHECK(b.b2[k] ==
              doctest::Approx(ref).epsilon(1e-5).scale(std::max(1.0, std::fabs(ref))));
      }
    }
  }
}

TEST_CASE("weighted_mle closed forms") {
  const FamilySpec pois(FamilyKind::poisson);
  const FitResult p = pois.weighted_mle({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
  CHECK(p.theta[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_FALSE(p.clamped);

  const FamilySpec norm(FamilyKind::normal);
  const FitResult n = norm.weighted_mle({0.0, 0.0, 4.0, 4.0}, {1.0, 1.0, 1.0, 1.0});
  CHECK(n.theta[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(n.theta[1] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("homogeneous_mle trivials and degenerate data") {
  const FamilySpec pois(FamilyKind::poisson);
  CHECK(pois.homogeneous_mle({0.0, 1.0, 2.0}).theta[0] == doctest::Approx(1.0));

  const FamilySpec norm(FamilyKind::normal);
  const FitResult flat = norm.homogeneous_mle(std::vector<double>(10, 5.0));
  CHECK(flat.theta[0] == doctest::Approx(5.0));
  CHECK(flat.theta[1] == doctest::Approx(norm.lo(1)));
  CHECK(flat.clamped);

  const FamilySpec nb(FamilyKind::negbin);
  const FitResult zeros = nb.homogeneous_mle(std::vector<double>(12, 0.0));
  CHECK(zeros.clamped);
  CHECK(zeros.theta[0] == doctest::Approx(nb.lo(0)));
}

TEST_CASE("negbin weighted_mle matches the grid-refinement oracle") {
  const FamilySpec nb(FamilyKind::negbin);
  Rng rng(555);
  std::vector<double> xs(500), ws(500, 1.0);
  for (double& x : xs) x = static_cast<double>(rng.negbin(3.0, 5.0));
  const FitResult fit = nb.weighted_mle(xs, ws);
  const oracle::GridFit ref = oracle::nb_grid_mle(xs, ws);
  CHECK(fit.theta[0] == doctest::Approx(ref.mu).epsilon(1e-3));
  CHECK(fit.theta[1] == doctest::Approx(ref.r).epsilon(1e-3));

  // and with unit weights at a larger sample
  std::vector<double> xs2(1000), ws2(1000, 1.0);
  for (double& x : xs2) x = static_cast<double>(rng.negbin(2.0, 10.0));
  const FitResult fit2 = nb.homogeneous_mle(xs2);
  const oracle::GridFit ref2 = oracle::nb_grid_mle(xs2, ws2);
  CHECK(fit2.theta[0] == doctest::Approx(ref2.mu).epsilon(1e-3));
  CHECK(fit2.theta[1] == doctest::Approx(ref2.r).epsilon(1e-3));
}

TEST_CASE("weighted_mle is invariant to weight scaling") {
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    for (FamilyKind kind : {FamilyKind::poisson, FamilyKind::negbin, FamilyKind::normal}) {
      const FamilySpec family(kind);
      const Theta truth = random_interior_theta(kind, rng);
      std::vector<double> xs(60), ws(60);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = random_support_x(kind, truth, rng);
        ws[i] = rng.uniform(0.1, 2.0);
      }
      const FitResult base = family.weighted_mle(xs, ws);
      for (double c : {1e-6, 3.0, 1e6}) {
        std::vector<double> scaled(ws);
        for (double& w : scaled) w *= c;
        const FitResult fit = family.weighted_mle(xs, scaled);
        for (int h = 0; h < family.dim(); ++h) {
          CHECK(fit.theta[static_cast<std::size_t>(h)] ==
                doctest::Approx(base.theta[static_cast<std::size_t>(h)])
                    .epsilon(1e-10)
                    .scale(std::max(1.0, std::fabs(base.theta[static_cast<std::size_t>(h)]))));
        }
      }
    }
  }
}

TEST_CASE("weighted_mle dominates random interior parameters") {
  Rng rng(909);
  for (int rep = 0; rep < 50; ++rep) {
    const FamilyKind kind =
        rep % 3 == 0 ? FamilyKind::poisson : rep % 3 == 1 ? FamilyKind::negbin : FamilyKind::normal;
    const FamilySpec family(kind);
    const Theta truth = random_interior_theta(kind, rng);
    std::vector<double> xs(80), ws(80);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = random_support_x(kind, truth, rng);
      ws[i] = rng.uniform(0.05, 1.5);
    }
    const ObsSet obs = ObsSet::from_weighted(xs, ws);
    const FitResult fit = family.weighted_mle(obs);
    const double best = family.weighted_loglik(fit.theta, obs);
    for (int probe = 0; probe < 50; ++probe) {
      const Theta other = random_interior_theta(kind, rng);
      CHECK(best + 1e-9 * (std::fabs(best) + 1.0) >= family.weighted_loglik(other, obs));
    }
  }
}

TEST_CASE("poisson score variance matches Fisher information") {
  const FamilySpec pois(FamilyKind::poisson);
  const double theta0 = 2.5;
  Rng rng(13);
  const int n = 100000;
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng.poisson(theta0));
    y[static_cast<std::size_t>(i)] = pois.deriv_bundle(Theta(theta0), x).b1[0];
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  double var = 0.0, m4 = 0.0;
  for (double v : y) {
    const double c = (v - mean) * (v - mean);
    var += c;
    m4 += c * c;
  }
  var /= n;
  m4 /= n;
  const double se = std::sqrt(std::max(m4 - var * var, 0.0) / n);
  CHECK(std::fabs(var - 1.0 / theta0) <= 3.0 * se);
}

TEST_CASE("ObsSet compression is order independent") {
  const std::vector<double> a = {3.0, 1.0, 2.0, 1.0, 3.0};
  const std::vector<double> b = {1.0, 1.0, 2.0, 3.0, 3.0};
  const ObsSet oa = ObsSet::from_sample(a);
  const ObsSet ob = ObsSet::from_sample(b);
  CHECK(oa.values == ob.values);
  CHECK(oa.weights == ob.weights);
  CHECK(oa.total == doctest::Approx(5.0));
}
