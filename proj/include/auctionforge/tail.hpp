#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "auctionforge/distribution.hpp"

namespace auctionforge {

// Mass the max must carry above beta/2: 1 - e^{-1/2}.
inline constexpr double kAnchorTailMass = 0.3934693402873666;

// Sample budget for quantiles of continuous max/sum distributions.
inline constexpr int kAnchorSamples = 100000;

inline constexpr std::uint64_t kDefaultAnchorSeed = 0x414E43484F52ULL;

struct TailProfile {
  double beta = 0.0;
  double truncLo = 0.0;
  double truncHi = 0.0;
  double ratio = 0.0;  // truncHi / truncLo == (4/eps) ln(1/eps)
  double epsilon = 0.0;
};

// Anchoring point beta = 2q, where q is the largest t with
// Pr[max_i X_i >= t] >= 1 - e^{-1/2}. Exact through the max-distribution when
// all inputs have finite support; otherwise the empirical quantile of
// kAnchorSamples max-samples drawn from `seed`. Throws DegenerateInstanceError
// when no positive anchor exists.
double anchoring_point(std::span<const ValueDistribution> dists,
                       std::uint64_t seed = kDefaultAnchorSeed);

// Same anchoring construction for the *sum* of the given marginals (used for
// per-bundle price ranges).
double anchoring_point_of_sum(std::span<const ValueDistribution> dists,
                              std::uint64_t seed = kDefaultAnchorSeed);

// [lo, hi] = [eps*beta/2, 2*beta*ln(1/eps)]. eps must lie in (0, 1/4).
std::pair<double, double> truncation_interval(double beta, double eps);

TailProfile tail_profile(std::span<const ValueDistribution> dists, double eps,
                         std::uint64_t seed = kDefaultAnchorSeed);

struct IidReserve {
  double reserve = 0.0;
  double guarantee = 0.0;  // Pr[max of m draws >= reserve] * reserve
};

// Best posted threshold for one item sold to m i.i.d. bidders: maximizes
// Pr[max >= r] * r over the candidate grid (full support when discrete, a
// (1+eps)-geometric grid over the truncation interval otherwise). Ties go to
// the smaller reserve.
IidReserve iid_reserve(const ValueDistribution& dist, int m, double eps,
                       std::uint64_t seed = kDefaultAnchorSeed);

}  // namespace auctionforge
