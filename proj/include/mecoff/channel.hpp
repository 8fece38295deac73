#pragma once

// Per-block normalized channel gain law: density, inverse-CDF sampling and
// quadrature rules realizing E_h[g(h)].

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mecoff/errors.hpp"
#include "mecoff/rng.hpp"

namespace mecoff {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nodes and probability weights of a discrete approximation to the gain law.
/// A finite atomic law is represented exactly by the same type.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  /// Atomic law with the given probabilities (renormalized to sum to one).
  static QuadratureRule atoms(std::vector<double> gains, std::vector<double> probs) {
    if (gains.empty() || gains.size() != probs.size()) throw DomainError("atoms: mismatched or empty inputs");
    double total = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
      if (!(gains[i] > 0.0)) throw DomainError("atoms: gains must be positive");
      if (!(probs[i] >= 0.0)) throw DomainError("atoms: probabilities must be nonnegative");
      total += probs[i];
    }
    if (!(total > 0.0)) throw DomainError("atoms: zero total probability");
    for (auto& p : probs) p /= total;
    return {std::move(gains), std::move(probs)};
  }
};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be >= 1");
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 1; i <= m; ++i) {
    double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i - 1)] = -z;
    x[static_cast<std::size_t>(n - i)] = z;
    w[static_cast<std::size_t>(i - 1)] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[static_cast<std::size_t>(n - i)] = w[static_cast<std::size_t>(i - 1)];
  }
  return {x, w};
}

/// Distribution of the normalized gain h (channel power gain over noise).
///
/// The shipped family is the exponential law of Rayleigh fading, truncated
/// to [h_min, h_max] and renormalized. The truncation floor keeps E[1/h]
/// finite. A point mass is available for degenerate-channel checks.
class GainDistribution {
 public:
  enum class Family { truncated_exponential, point_mass };

  static GainDistribution truncated_exponential(double mean_mu, double h_min, double h_max = kInf) {
    if (!(mean_mu > 0.0) || !std::isfinite(mean_mu)) throw DomainError("gain mean must be positive");
    if (!(h_min > 0.0) || !(h_min < h_max)) throw DomainError("gain support requires 0 < h_min < h_max");
    GainDistribution g;
    g.family_ = Family::truncated_exponential;
    g.mean_mu_ = mean_mu;
    g.h_min_ = h_min;
    g.h_max_ = h_max;
    g.mass_ = std::isfinite(h_max) ? -std::expm1(-(h_max - h_min) / mean_mu) : 1.0;
    return g;
  }

  /// Truncation [1e-3 mu, 50 mu].
  static GainDistribution rayleigh(double mean_mu) {
    return truncated_exponential(mean_mu, 1e-3 * mean_mu, 50.0 * mean_mu);
  }

  static GainDistribution point_mass(double h0) {
    if (!(h0 > 0.0) || !std::isfinite(h0)) throw DomainError("point mass gain must be positive");
    GainDistribution g;
    g.family_ = Family::point_mass;
    g.mean_mu_ = g.h_min_ = g.h_max_ = h0;
    return g;
  }

  Family family() const { return family_; }
  double mean_mu() const { return mean_mu_; }
  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }
  bool bounded() const { return std::isfinite(h_max_); }

  /// Upper end used for quadrature when the support is unbounded.
  double effective_upper() const { return bounded() ? h_max_ : h_min_ + 40.0 * mean_mu_; }

  double density(double h) const {
    if (family_ == Family::point_mass) return 0.0;
    if (h < h_min_ || h > h_max_) return 0.0;
    return std::exp(-(h - h_min_) / mean_mu_) / (mean_mu_ * mass_);
  }

  double cdf(double h) const {
    if (h < h_min_) return 0.0;
    if (h >= h_max_) return 1.0;
    if (family_ == Family::point_mass) return 1.0;
    return -std::expm1(-(h - h_min_) / mean_mu_) / mass_;
  }

  /// Mean of the truncated (renormalized) law.
  double truncated_mean() const {
    if (family_ == Family::point_mass) return h_min_;
    if (!bounded()) return h_min_ + mean_mu_;
    const double span = h_max_ - h_min_;
    return h_min_ + mean_mu_ - span * std::exp(-span / mean_mu_) / mass_;
  }

  /// Inverse-CDF draw.
  double sample(CounterRng& rng) const {
    if (family_ == Family::point_mass) return h_min_;
    const double u = rng.uniform();
    const double h = h_min_ - mean_mu_ * std::log1p(-u * mass_);
    return h > h_max_ ? h_max_ : h;
  }

 private:
  GainDistribution() = default;

  Family family_ = Family::truncated_exponential;
  double mean_mu_ = 1.0;
  double h_min_ = 0.0;
  double h_max_ = kInf;
  double mass_ = 1.0;  // untruncated probability of [h_min, h_max], relative to h >= h_min
};

inline constexpr int kPanelOrder = 8;

/// Composite Gauss-Legendre rule on log-spaced panels covering the support.
/// `node_count` is rounded up to a multiple of 8; each panel uses 8 nodes.
/// Weights absorb the density and are renormalized to sum to one.
inline QuadratureRule build_quadrature(const GainDistribution& dist, int node_count) {
  if (node_count < kPanelOrder) throw DomainError("node_count must be >= 8");
  if (dist.family() == GainDistribution::Family::point_mass) {
    return {{dist.h_min()}, {1.0}};
  }
  const int panels = (node_count + kPanelOrder - 1) / kPanelOrder;
  const auto [x, w] = gauss_legendre(kPanelOrder);
  const double u0 = std::log(dist.h_min());
  const double u1 = std::log(dist.effective_upper());
  const double width = (u1 - u0) / panels;

  QuadratureRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels * kPanelOrder));
  rule.weights.reserve(rule.nodes.capacity());
  for (int p = 0; p < panels; ++p) {
    const double mid = u0 + (p + 0.5) * width;
    for (int k = 0; k < kPanelOrder; ++k) {
      // Substitution h = e^u, dh = h du.
      double h = std::exp(mid + 0.5 * width * x[static_cast<std::size_t>(k)]);
      if (h < dist.h_min()) h = dist.h_min();
      if (h > dist.effective_upper()) h = dist.effective_upper();
      rule.nodes.push_back(h);
      rule.weights.push_back(0.5 * width * w[static_cast<std::size_t>(k)] * dist.density(h) * h);
    }
  }
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  if (!(total > 0.0)) throw NumericError("quadrature weights vanish over the support");
  for (auto& wt : rule.weights) wt /= total;
  return rule;
}

/// E[g(h)] under the rule.
template <typename F>
double expect(const QuadratureRule& rule, F&& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = g(rule.nodes[i]);
    if (!std::isfinite(v)) throw NumericError("expectation integrand is not finite at a node");
    acc += rule.weights[i] * v;
  }
  return acc;
}

template <typename F>
double expect(const GainDistribution&, const QuadratureRule& rule, F&& g) {
  return expect(rule, std::forward<F>(g));
}

}  // namespace mecoff
