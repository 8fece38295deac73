#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/rng.hpp"

using namespace mecoff;

namespace {

// Closed-form moments of the exponential law with mean mu truncated to [a, b].
double truncated_mean(double mu, double a, double b) {
  const double z = std::isfinite(b) ? 1.0 - std::exp(-(b - a) / mu) : 1.0;
  const double tail = std::isfinite(b) ? (b - a) * std::exp(-(b - a) / mu) : 0.0;
  return a + mu - tail / z;
}

double truncated_inverse_mean(double mu, double a, double b) {
  // E1(x) = -Ei(-x).
  const double z = std::isfinite(b) ? 1.0 - std::exp(-(b - a) / mu) : 1.0;
  const double e1_a = -std::expint(-a / mu);
  const double e1_b = std::isfinite(b) ? -std::expint(-b / mu) : 0.0;
  return std::exp(a / mu) * (e1_a - e1_b) / (mu * z);
}

// Composite Simpson in u = ln h, independent of the Gauss-Legendre rule.
template <typename F>
double simpson_log(F f, double a, double b, int intervals) {
  const double u0 = std::log(a), u1 = std::log(b), h = (u1 - u0) / intervals;
  double acc = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double x = std::exp(u0 + i * h);
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f(x) * x;
  }
  return acc * h / 3.0;
}

}  // namespace

TEST(GainDistribution, DensitySupportAndMass) {
  const auto dist = GainDistribution::rayleigh(100.0);
  EXPECT_DOUBLE_EQ(dist.h_min(), 0.1);
  EXPECT_DOUBLE_EQ(dist.h_max(), 5000.0);
  EXPECT_EQ(dist.density(0.05), 0.0);
  EXPECT_EQ(dist.density(6000.0), 0.0);
  const double mass = simpson_log([&](double h) { return dist.density(h); }, 0.1, 5000.0, 200000);
  EXPECT_NEAR(mass, 1.0, 1e-8);
  EXPECT_GT(dist.density(0.1 + 1e-9), dist.density(5000.0 - 1e-9));
  double prev = dist.density(0.1);
  for (double h = 1.0; h < 5000.0; h += 7.0) {
    EXPECT_LT(dist.density(h), prev);
    prev = dist.density(h);
  }
}

TEST(GainDistribution, InvalidParameters) {
  EXPECT_THROW(GainDistribution::truncated_exponential(100.0, 0.0), DomainError);
  EXPECT_THROW(GainDistribution::truncated_exponential(100.0, 5.0, 5.0), DomainError);
  EXPECT_THROW(GainDistribution::truncated_exponential(-1.0, 0.1), DomainError);
  EXPECT_THROW(GainDistribution::point_mass(0.0), DomainError);
}

TEST(GainDistribution, SampleMeanMatchesAnalytic) {
  const auto dist = GainDistribution::truncated_exponential(100.0, 0.1);
  CounterRng rng(2024);
  constexpr int kDraws = 1000000;
  std::vector<double> draws(kDraws);
  double sum = 0.0, sq = 0.0;
  for (auto& h : draws) {
    h = dist.sample(rng);
    sum += h;
    sq += h * h;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sq / kDraws - mean * mean) / kDraws);
  EXPECT_NEAR(mean, truncated_mean(100.0, 0.1, kInf), 3.0 * se);
  EXPECT_GE(*std::min_element(draws.begin(), draws.end()), 0.1);

  // Kolmogorov-Smirnov against the analytic CDF, 1% critical value.
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double F = 1.0 - std::exp(-(draws[static_cast<std::size_t>(i)] - 0.1) / 100.0);
    ks = std::max({ks, std::abs(F - static_cast<double>(i) / kDraws), std::abs(F - (i + 1.0) / kDraws)});
  }
  EXPECT_LT(ks, 1.628 / std::sqrt(static_cast<double>(kDraws)));
}

TEST(GainDistribution, BoundedSamplesStayInSupport) {
  const auto dist = GainDistribution::truncated_exponential(10.0, 1.0, 12.0);
  CounterRng rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double h = dist.sample(rng);
    ASSERT_GE(h, 1.0);
    ASSERT_LE(h, 12.0);
  }
}

TEST(Quadrature, NormalizationAndSupport) {
  const auto dist = GainDistribution::rayleigh(100.0);
  const auto rule = build_quadrature(dist, 64);
  EXPECT_EQ(rule.size(), 64u);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    EXPECT_GE(rule.weights[i], 0.0);
    EXPECT_GE(rule.nodes[i], dist.h_min());
    EXPECT_LE(rule.nodes[i], dist.h_max());
  }
  EXPECT_NEAR(expect(rule, [](double) { return 1.0; }), 1.0, 1e-8);
  EXPECT_THROW(build_quadrature(dist, 4), DomainError);
}

TEST(Quadrature, MomentsMatchClosedForms) {
  const auto dist = GainDistribution::rayleigh(100.0);
  const auto rule = build_quadrature(dist, 64);
  const double mean = truncated_mean(100.0, 0.1, 5000.0);
  EXPECT_NEAR(expect(rule, [](double h) { return h; }), mean, 1e-6 * mean);
  const double inv = truncated_inverse_mean(100.0, 0.1, 5000.0);
  EXPECT_NEAR(expect(rule, [](double h) { return 1.0 / h; }), inv, 1e-8 * inv);
  EXPECT_NEAR(dist.truncated_mean(), mean, 1e-12 * mean);
}

TEST(Quadrature, InverseGainAgreesWithMonteCarlo) {
  const auto dist = GainDistribution::rayleigh(100.0);
  const auto rule = build_quadrature(dist, 64);
  CounterRng rng(99);
  constexpr int kDraws = 10000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double g = 1.0 / dist.sample(rng);
    sum += g;
    sq += g * g;
  }
  const double mc = sum / kDraws;
  const double se = std::sqrt((sq / kDraws - mc * mc) / kDraws);
  EXPECT_NEAR(expect(rule, [](double h) { return 1.0 / h; }), mc, 3.0 * se);
}

TEST(Quadrature, AgreesWithMonteCarloForSeveralIntegrands) {
  const auto dist = GainDistribution::rayleigh(100.0);
  const auto rule = build_quadrature(dist, 64);
  auto capped = [](double h) { return std::min(std::exp(1.0 / h), 1e3); };
  for (auto g : {+[](double h) { return h; }, +[](double h) { return 1.0 / h; }}) {
    CounterRng rng(1234);
    double sum = 0.0, sq = 0.0;
    constexpr int kDraws = 1000000;
    for (int i = 0; i < kDraws; ++i) {
      const double v = g(dist.sample(rng));
      sum += v;
      sq += v * v;
    }
    const double mc = sum / kDraws;
    EXPECT_NEAR(expect(rule, g), mc, 3.0 * std::sqrt((sq / kDraws - mc * mc) / kDraws));
  }
  CounterRng rng(4321);
  double sum = 0.0, sq = 0.0;
  constexpr int kDraws = 1000000;
  for (int i = 0; i < kDraws; ++i) {
    const double v = capped(dist.sample(rng));
    sum += v;
    sq += v * v;
  }
  const double mc = sum / kDraws;
  EXPECT_NEAR(expect(rule, capped), mc, 3.0 * std::sqrt((sq / kDraws - mc * mc) / kDraws));
}

TEST(Quadrature, RefinementIsStable) {
  const auto dist = GainDistribution::rayleigh(100.0);
  const auto coarse = build_quadrature(dist, 64);
  const auto fine = build_quadrature(dist, 128);
  auto inv = [](double h) { return 1.0 / h; };
  const double a = expect(coarse, inv), b = expect(fine, inv);
  EXPECT_LT(std::abs(a - b) / b, 1e-6);
  // A DP-like stage objective: energy of a fixed block transmission.
  auto stage = [](double h) { return 2e-3 * std::expm1(1.5) / h; };
  EXPECT_LT(std::abs(expect(coarse, stage) - expect(fine, stage)) / expect(fine, stage), 1e-6);
}

TEST(Quadrature, NonFiniteIntegrandIsReported) {
  const auto rule = build_quadrature(GainDistribution::rayleigh(100.0), 16);
  EXPECT_THROW(expect(rule, [](double) { return std::nan(""); }), NumericError);
}

TEST(Quadrature, PointMassAndAtoms) {
  const auto rule = build_quadrature(GainDistribution::point_mass(42.0), 64);
  ASSERT_EQ(rule.size(), 1u);
  EXPECT_EQ(rule.nodes[0], 42.0);
  EXPECT_EQ(rule.weights[0], 1.0);
  const auto atoms = QuadratureRule::atoms({1.0, 2.0}, {1.0, 3.0});
  EXPECT_DOUBLE_EQ(atoms.weights[0], 0.25);
  EXPECT_DOUBLE_EQ(expect(atoms, [](double h) { return h; }), 1.75);
  EXPECT_THROW(QuadratureRule::atoms({1.0}, {1.0, 2.0}), DomainError);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto [x, w] = gauss_legendre(8);
  double sum = 0.0, p14 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += w[i];
    p14 += w[i] * std::pow(x[i], 14);
  }
  EXPECT_NEAR(sum, 2.0, 1e-14);
  EXPECT_NEAR(p14, 2.0 / 15.0, 1e-14);
}

TEST(CounterRng, DeterministicAndSplittable) {
  CounterRng a(17), b(17);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
  const CounterRng root(17);
  CounterRng s1 = root.split(1), s1b = root.split(1), s2 = root.split(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = s1(), y = s1b(), z = s2();
    ASSERT_EQ(x, y);
    equal += x == z;
  }
  EXPECT_EQ(equal, 0);
  CounterRng u(3);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}
