#include "auctionforge/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace auctionforge {

namespace {

constexpr double kProbTol = 1e-9;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

ValueDistribution ValueDistribution::discrete(std::vector<double> support,
                                              std::vector<double> probs) {
  require(!support.empty(), "discrete distribution needs a nonempty support");
  require(support.size() == probs.size(),
          "support and probs must have equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    require(support[i] >= 0.0, "support values must be nonnegative");
    require(probs[i] > 0.0, "every atom probability must be positive");
    if (i > 0) require(support[i] > support[i - 1], "support must be strictly ascending");
    total += probs[i];
  }
  require(std::abs(total - 1.0) <= kProbTol, "probs must sum to 1");

  ValueDistribution d;
  d.kind_ = DistKind::Discrete;
  d.support_ = std::move(support);
  d.probs_ = std::move(probs);
  d.cum_.resize(d.probs_.size());
  std::partial_sum(d.probs_.begin(), d.probs_.end(), d.cum_.begin());
  d.cum_.back() = 1.0;
  return d;
}

ValueDistribution ValueDistribution::uniform(double lo, double hi) {
  require(lo >= 0.0, "uniform lo must be nonnegative");
  require(hi > lo, "uniform needs hi > lo");
  ValueDistribution d;
  d.kind_ = DistKind::Uniform;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

ValueDistribution ValueDistribution::exponential(double rate) {
  require(rate > 0.0, "exponential rate must be positive");
  ValueDistribution d;
  d.kind_ = DistKind::Exponential;
  d.rate_ = rate;
  return d;
}

ValueDistribution ValueDistribution::point_mass(double value) {
  require(value >= 0.0, "point mass must be nonnegative");
  ValueDistribution d;
  d.kind_ = DistKind::PointMass;
  d.support_ = {value};
  d.probs_ = {1.0};
  d.cum_ = {1.0};
  return d;
}

double ValueDistribution::expectation() const {
  switch (kind_) {
    case DistKind::Discrete: {
      double e = 0.0;
      for (std::size_t i = 0; i < support_.size(); ++i) e += support_[i] * probs_[i];
      return e;
    }
    case DistKind::Uniform:
      return 0.5 * (lo_ + hi_);
    case DistKind::Exponential:
      return 1.0 / rate_;
    case DistKind::PointMass:
      return support_.front();
  }
  return 0.0;
}

double ValueDistribution::cdf(double x) const {
  switch (kind_) {
    case DistKind::Discrete:
    case DistKind::PointMass: {
      auto it = std::upper_bound(support_.begin(), support_.end(), x);
      if (it == support_.begin()) return 0.0;
      return cum_[static_cast<std::size_t>(it - support_.begin()) - 1];
    }
    case DistKind::Uniform:
      if (x < lo_) return 0.0;
      if (x >= hi_) return 1.0;
      return (x - lo_) / (hi_ - lo_);
    case DistKind::Exponential:
      return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate_ * x);
  }
  return 0.0;
}

double ValueDistribution::cdf_below(double x) const {
  if (has_finite_support()) {
    auto it = std::lower_bound(support_.begin(), support_.end(), x);
    if (it == support_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - support_.begin()) - 1];
  }
  return cdf(x);  // continuous: P[X < x] == P[X <= x]
}

double ValueDistribution::sample(RandomStream& rng) const {
  switch (kind_) {
    case DistKind::PointMass:
      return support_.front();
    case DistKind::Discrete: {
      double u = rng.next_unit();
      auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
      std::size_t idx = std::min<std::size_t>(
          static_cast<std::size_t>(it - cum_.begin()), support_.size() - 1);
      return support_[idx];
    }
    case DistKind::Uniform:
      return lo_ + (hi_ - lo_) * rng.next_unit();
    case DistKind::Exponential:
      return -std::log1p(-rng.next_unit()) / rate_;
  }
  return 0.0;
}

double ValueDistribution::support_min() const {
  switch (kind_) {
    case DistKind::Discrete:
    case DistKind::PointMass:
      return support_.front();
    case DistKind::Uniform:
      return lo_;
    case DistKind::Exponential:
      return 0.0;
  }
  return 0.0;
}

double ValueDistribution::support_max() const {
  switch (kind_) {
    case DistKind::Discrete:
    case DistKind::PointMass:
      return support_.back();
    case DistKind::Uniform:
      return hi_;
    case DistKind::Exponential:
      return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

nlohmann::json ValueDistribution::to_json() const {
  switch (kind_) {
    case DistKind::Discrete:
      return {{"type", "discrete"}, {"support", support_}, {"probs", probs_}};
    case DistKind::Uniform:
      return {{"type", "uniform"}, {"lo", lo_}, {"hi", hi_}};
    case DistKind::Exponential:
      return {{"type", "exponential"}, {"rate", rate_}};
    case DistKind::PointMass:
      return {{"type", "point"}, {"value", support_.front()}};
  }
  return {};
}

ValueDistribution ValueDistribution::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("distribution fragment needs a \"type\" field");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "discrete")
      return discrete(j.at("support").get<std::vector<double>>(),
                      j.at("probs").get<std::vector<double>>());
    if (type == "uniform")
      return uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
    if (type == "exponential") return exponential(j.at("rate").get<double>());
    if (type == "point") return point_mass(j.at("value").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad distribution fragment: ") + e.what());
  }
  throw std::invalid_argument("unknown distribution type \"" + type + "\"");
}

MhrResult check_mhr(const ValueDistribution& dist) {
  // Exponential has constant hazard, uniform has hazard 1/(hi-x) increasing,
  // and a point mass is degenerate; all count as MHR.
  if (!dist.has_finite_support() || dist.kind() == DistKind::PointMass)
    return {true, std::nullopt};

  const auto& p = dist.probs();
  double tail = 1.0;
  double prev = -1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double hazard = p[i] / tail;
    if (hazard + 1e-12 < prev) return {false, i};
    prev = hazard;
    tail -= p[i];
  }
  return {true, std::nullopt};
}

double support_ratio(const ValueDistribution& dist) {
  double lo = dist.support_min();
  double hi = dist.support_max();
  if (lo <= 0.0 || !std::isfinite(hi))
    return std::numeric_limits<double>::infinity();
  return hi / lo;
}

std::optional<ValueDistribution> exact_max_distribution(
    std::span<const ValueDistribution> dists) {
  if (dists.empty())
    throw std::invalid_argument("max_distribution needs at least one input");
  if (dists.size() == 1) return dists[0];
  for (const auto& d : dists)
    if (!d.has_finite_support()) return std::nullopt;

  std::vector<double> merged;
  for (const auto& d : dists)
    merged.insert(merged.end(), d.support().begin(), d.support().end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  // CDF of the max is the product of the input CDFs at each merged point.
  std::vector<double> support;
  std::vector<double> probs;
  double prev_cdf = 0.0;
  for (double v : merged) {
    double c = 1.0;
    for (const auto& d : dists) c *= d.cdf(v);
    double mass = c - prev_cdf;
    if (mass > 0.0) {
      support.push_back(v);
      probs.push_back(mass);
    }
    prev_cdf = c;
  }
  // renormalize away accumulated rounding
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& q : probs) q /= total;
  if (support.size() == 1) return ValueDistribution::point_mass(support[0]);
  return ValueDistribution::discrete(std::move(support), std::move(probs));
}

double max_cdf(std::span<const ValueDistribution> dists, double x) {
  double c = 1.0;
  for (const auto& d : dists) c *= d.cdf(x);
  return c;
}

double sample_max(std::span<const ValueDistribution> dists, RandomStream& rng) {
  double best = 0.0;
  bool first = true;
  for (const auto& d : dists) {
    double v = d.sample(rng);
    if (first || v > best) best = v;
    first = false;
  }
  return best;
}

double expected_max(std::span<const ValueDistribution> dists, int samples,
                    std::uint64_t seed) {
  if (auto exact = exact_max_distribution(dists)) return exact->expectation();
  if (samples < 1)
    throw std::invalid_argument(
        "expected_max needs samples >= 1 for continuous inputs");
  RandomStream rng(seed);
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) acc += sample_max(dists, rng);
  return acc / samples;
}

namespace {

// Largest k with (1+eps)^k <= v, nudged so that exact powers map to themselves.
int grid_floor_exponent(double v, double log_base) {
  return static_cast<int>(std::floor(std::log(v) / log_base + 1e-9));
}

double grid_power(int k, double eps) { return std::pow(1.0 + eps, k); }

}  // namespace

ValueDistribution coarsen(const ValueDistribution& dist, double eps, double lo,
                          double hi) {
  require(eps > 0.0 && eps < 1.0, "coarsen needs eps in (0,1)");
  require(lo > 0.0 && lo < hi, "coarsen needs 0 < lo < hi");

  const double log_base = std::log1p(eps);
  const int k_lo = grid_floor_exponent(lo, log_base);
  const int k_hi = grid_floor_exponent(hi, log_base);

  // Atoms k_lo..k_hi plus the zero sink. Values in [lo, hi] round down to the
  // nearest grid power, which may be the snapped-down endpoint (1+eps)^k_lo.
  constexpr int kZeroSink = std::numeric_limits<int>::min();
  auto bucket_of = [&](double v) -> int {
    if (v < lo) return kZeroSink;
    if (v > hi) v = hi;
    int k = grid_floor_exponent(v, log_base);
    return std::clamp(k, k_lo, k_hi);
  };

  std::map<int, double> mass;
  if (dist.has_finite_support()) {
    for (std::size_t i = 0; i < dist.support().size(); ++i)
      mass[bucket_of(dist.support()[i])] += dist.probs()[i];
  } else {
    // Continuous input: cell boundaries through the exact CDF. The preimage of
    // grid point k is [max(lo, (1+eps)^k), (1+eps)^{k+1}), except that the top
    // cell absorbs everything above hi.
    double below = dist.cdf_below(lo);
    if (below > 0.0) mass[kZeroSink] += below;
    double prev = below;
    for (int k = k_lo; k <= k_hi; ++k) {
      double upper = (k == k_hi) ? std::numeric_limits<double>::infinity()
                                 : std::min(grid_power(k + 1, eps), hi);
      double c = (k == k_hi) ? 1.0 : dist.cdf_below(upper);
      if (c - prev > 0.0) mass[k] += c - prev;
      prev = c;
    }
  }

  std::vector<double> support;
  std::vector<double> probs;
  for (const auto& [k, p] : mass) {
    if (p <= 0.0) continue;
    support.push_back(k == kZeroSink ? 0.0 : grid_power(k, eps));
    probs.push_back(p);
  }
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& q : probs) q /= total;
  if (support.size() == 1) return ValueDistribution::point_mass(support[0]);
  return ValueDistribution::discrete(std::move(support), std::move(probs));
}

}  // namespace auctionforge
