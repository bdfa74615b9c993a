#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "auctionforge/common.hpp"

namespace auctionforge {

enum class DistKind { Discrete, Uniform, Exponential, PointMass };

// One value marginal F_ij: either an explicit discrete distribution or one of
// the supported closed-form continuous families. Immutable after construction
// and safe to share across threads.
class ValueDistribution {
 public:
  // support strictly ascending and nonnegative, probs positive summing to 1
  // (absolute tolerance 1e-9); throws std::invalid_argument otherwise.
  static ValueDistribution discrete(std::vector<double> support,
                                    std::vector<double> probs);
  static ValueDistribution uniform(double lo, double hi);
  static ValueDistribution exponential(double rate);
  static ValueDistribution point_mass(double value);

  DistKind kind() const { return kind_; }

  // Discrete and point-mass marginals have an explicit finite support.
  bool has_finite_support() const {
    return kind_ == DistKind::Discrete || kind_ == DistKind::PointMass;
  }

  // Finite support as atoms; valid for discrete and point-mass kinds.
  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double rate() const { return rate_; }
  double value() const { return support_.empty() ? 0.0 : support_.front(); }

  double expectation() const;
  double cdf(double x) const;        // P[X <= x]
  double cdf_below(double x) const;  // P[X < x]
  double sample(RandomStream& rng) const;

  double support_min() const;
  double support_max() const;  // +infinity for exponential

  nlohmann::json to_json() const;
  static ValueDistribution from_json(const nlohmann::json& j);

 private:
  ValueDistribution() = default;

  DistKind kind_ = DistKind::PointMass;
  std::vector<double> support_;  // discrete/point atoms
  std::vector<double> probs_;
  std::vector<double> cum_;  // cumulative probs, same length as support_
  double lo_ = 0.0, hi_ = 0.0;  // uniform
  double rate_ = 0.0;           // exponential
};

struct MhrResult {
  bool is_mhr = false;
  // First support index at which the discrete hazard decreases; empty when
  // MHR holds or the family is continuous (all supported families are MHR).
  std::optional<std::size_t> witness;
};

// Monotone hazard rate check. Continuous families are decided in closed form;
// discrete marginals use the hazard h(v_i) = p_i / sum_{k>=i} p_k.
MhrResult check_mhr(const ValueDistribution& dist);

// Ratio of support endpoints, the bounded-ratio alternative to MHR. Returns
// +infinity for unbounded or zero-min supports.
double support_ratio(const ValueDistribution& dist);

// Exact distribution of max_i X_i when every input has finite support;
// nullopt otherwise. Single-element input is returned unchanged.
std::optional<ValueDistribution> exact_max_distribution(
    std::span<const ValueDistribution> dists);

// P[max_i X_i <= x] (product of input CDFs).
double max_cdf(std::span<const ValueDistribution> dists, double x);

double sample_max(std::span<const ValueDistribution> dists, RandomStream& rng);

// E[max_i X_i]: exact via the max-distribution when all inputs have finite
// support, Monte Carlo with `samples` draws otherwise.
double expected_max(std::span<const ValueDistribution> dists, int samples,
                    std::uint64_t seed);

// Round the marginal onto {0} plus the geometric grid (1+eps)^k over
// [lo, hi]. Mass below lo collapses to 0; mass above hi clamps to hi first.
// Surviving values round down to the nearest grid power, so an atom never
// moves up and loses at most a (1+eps) factor. Continuous inputs are
// discretized through their exact CDF at the grid cell boundaries.
ValueDistribution coarsen(const ValueDistribution& dist, double eps, double lo,
                          double hi);

}  // namespace auctionforge
