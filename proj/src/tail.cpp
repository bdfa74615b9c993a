#include "auctionforge/tail.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace auctionforge {

namespace {

// Largest t with empirical Pr[X >= t] >= kAnchorTailMass: the k-th largest
// sample with k = ceil(mass * N).
double empirical_upper_quantile(std::vector<double>& samples) {
  const std::size_t n = samples.size();
  std::size_t k = static_cast<std::size_t>(
      std::ceil(kAnchorTailMass * static_cast<double>(n)));
  k = std::max<std::size_t>(1, std::min(k, n));
  std::nth_element(samples.begin(), samples.begin() + (n - k), samples.end());
  return samples[n - k];
}

double anchor_from_q(double q) {
  if (q <= 0.0)
    throw DegenerateInstanceError(
        "no positive anchoring point: the max carries too little mass above 0");
  return 2.0 * q;
}

}  // namespace

double anchoring_point(std::span<const ValueDistribution> dists,
                       std::uint64_t seed) {
  if (dists.empty())
    throw std::invalid_argument("anchoring_point needs at least one marginal");
  bool any_positive = false;
  for (const auto& d : dists) any_positive = any_positive || d.expectation() > 0.0;
  if (!any_positive)
    throw DegenerateInstanceError("all marginals have zero expectation");

  auto exact = exact_max_distribution(dists);
  if (exact && exact->has_finite_support()) {
    // Largest atom v with Pr[max >= v] >= threshold.
    const auto& sup = exact->support();
    const auto& probs = exact->probs();
    double tail = 0.0;
    for (std::size_t i = sup.size(); i-- > 0;) {
      tail += probs[i];
      if (tail >= kAnchorTailMass) return anchor_from_q(sup[i]);
    }
    return anchor_from_q(sup.front());
  }

  RandomStream rng(seed);
  std::vector<double> samples(kAnchorSamples);
  for (auto& s : samples) s = sample_max(dists, rng);
  return anchor_from_q(empirical_upper_quantile(samples));
}

double anchoring_point_of_sum(std::span<const ValueDistribution> dists,
                              std::uint64_t seed) {
  if (dists.empty())
    throw std::invalid_argument("anchoring_point_of_sum needs input");
  bool all_point = true;
  double total = 0.0;
  bool any_positive = false;
  for (const auto& d : dists) {
    all_point = all_point && d.kind() == DistKind::PointMass;
    total += d.expectation();
    any_positive = any_positive || d.expectation() > 0.0;
  }
  if (!any_positive)
    throw DegenerateInstanceError("all marginals have zero expectation");
  if (all_point) return anchor_from_q(total);

  RandomStream rng(seed);
  std::vector<double> samples(kAnchorSamples);
  for (auto& s : samples) {
    double acc = 0.0;
    for (const auto& d : dists) acc += d.sample(rng);
    s = acc;
  }
  return anchor_from_q(empirical_upper_quantile(samples));
}

std::pair<double, double> truncation_interval(double beta, double eps) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(eps > 0.0 && eps < 0.25))
    throw std::invalid_argument("eps must lie in (0, 1/4)");
  double hi = 2.0 * beta * std::log(1.0 / eps);
  double lo = eps * beta / 2.0;
  return {lo, hi};
}

TailProfile tail_profile(std::span<const ValueDistribution> dists, double eps,
                         std::uint64_t seed) {
  TailProfile tp;
  tp.beta = anchoring_point(dists, seed);
  auto [lo, hi] = truncation_interval(tp.beta, eps);
  tp.truncLo = lo;
  tp.truncHi = hi;
  tp.ratio = hi / lo;
  tp.epsilon = eps;
  return tp;
}

IidReserve iid_reserve(const ValueDistribution& dist, int m, double eps,
                       std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("iid_reserve needs m >= 1");

  // Pr[max of m i.i.d. draws >= r] = 1 - P[X < r]^m.
  auto objective = [&](double r) {
    double below = dist.cdf_below(r);
    return (1.0 - std::pow(below, m)) * r;
  };

  std::vector<double> candidates;
  if (dist.has_finite_support()) {
    candidates = dist.support();
  } else {
    std::vector<ValueDistribution> copies(static_cast<std::size_t>(m), dist);
    double beta = anchoring_point(copies, seed);
    auto [lo, hi] = truncation_interval(beta, eps);
    const double base = std::log1p(eps);
    int k_lo = static_cast<int>(std::floor(std::log(lo) / base + 1e-9));
    int k_hi = static_cast<int>(std::ceil(std::log(hi) / base - 1e-9));
    candidates.reserve(k_hi - k_lo + 1);
    for (int k = k_lo; k <= k_hi; ++k) candidates.push_back(std::pow(1.0 + eps, k));
  }

  IidReserve best;
  bool first = true;
  for (double r : candidates) {
    double g = objective(r);
    // strict improvement only: ties resolve to the smaller candidate
    if (first || g > best.guarantee + 1e-15) {
      best = {r, g};
      first = false;
    }
  }
  return best;
}

}  // namespace auctionforge
