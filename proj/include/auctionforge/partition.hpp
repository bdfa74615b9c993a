#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "auctionforge/instance.hpp"
#include "auctionforge/tail.hpp"

namespace auctionforge {

struct ItemRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct RangeRatioResult {
  double c = 0.0;                 // max_j hi_j / lo_j == (4/eps) ln(1/eps)
  std::vector<ItemRange> ranges;  // truncated value range of X_j = max_i v_ij
};

// Per-item truncated ranges of the max value, intersected with the actual
// support bounds (a point-mass column yields a degenerate range). The reported
// c is the truncation-interval ratio the construction guarantees.
RangeRatioResult range_ratio(const AuctionInstance& instance, double eps,
                             std::uint64_t seed = kDefaultAnchorSeed);

// The three-way item split: a constant-size high-expectation group R, a
// concentration group S, and a negligible group T.
struct Partition {
  std::vector<int> R, S, T;
  std::map<int, std::vector<int>> buckets;  // ell -> items with E in (s/2^ell, s/2^{ell-1}]
  int ellStar = 0;
  double sHat = 0.0;  // the s the bucketing ran with
  double c = 0.0;

  nlohmann::json to_json() const;
};

// Bucket construction: items with E <= eps*s/(2n) go to T; item j lands in
// bucket ell with E in (s/2^ell, s/2^{ell-1}]; buckets with ell <= ellStar go
// to R; larger buckets go to S when |B_ell| >= (2c^2/eps^2)(ln(2/delta) +
// ell - ellStar) and to T otherwise. ellStar = ceil(log2((16c^2/eps^3)
// ln(2/delta))).
Partition partition_items(std::span<const double> expectedMaxes, double c,
                          double eps, double delta);

// Sum over items of E[max_i v_ij]; exact when every marginal has finite
// support, Monte Carlo with `samples` draws otherwise.
double estimate_s(const AuctionInstance& instance, int samples,
                  std::uint64_t seed);

// Per-item E[max_i v_ij], exact where possible.
std::vector<double> expected_maxes(const AuctionInstance& instance, int samples,
                                   std::uint64_t seed);

}  // namespace auctionforge
