#include "auctionforge/partition.hpp"

#include <algorithm>
#include <cmath>

namespace auctionforge {

RangeRatioResult range_ratio(const AuctionInstance& instance, double eps,
                             std::uint64_t seed) {
  RangeRatioResult out;
  out.c = (4.0 / eps) * std::log(1.0 / eps);
  out.ranges.reserve(instance.items());
  for (int j = 0; j < instance.items(); ++j) {
    auto col = instance.column(j);
    double beta = anchoring_point(col, splitmix64(seed + j));
    auto [lo, hi] = truncation_interval(beta, eps);
    // Clip to what the column can actually produce; keeps degenerate columns
    // (point masses) on their exact value.
    double smin = 0.0, smax = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) {
      smin = std::max(smin, col[i].support_min());  // max lower-bounds max_i
      smax = std::max(smax, col[i].support_max());
    }
    double rlo = std::max(lo, smin);
    double rhi = std::min(hi, smax);
    if (rlo > rhi) {
      // support entirely outside the truncation interval; fall back to the
      // nonempty side
      rlo = rhi = std::clamp(smax, lo, hi);
    }
    out.ranges.push_back({rlo, rhi});
  }
  return out;
}

nlohmann::json Partition::to_json() const {
  return {{"R", R}, {"S", S}, {"T", T}, {"ellStar", ellStar}, {"sHat", sHat}};
}

Partition partition_items(std::span<const double> expectedMaxes, double c,
                          double eps, double delta) {
  if (expectedMaxes.empty())
    throw std::invalid_argument("partition_items needs at least one item");
  if (!(c >= 1.0)) throw std::invalid_argument("range ratio c must be >= 1");
  if (!(eps > 0.0 && eps < 0.25))
    throw std::invalid_argument("eps must lie in (0, 1/4)");
  if (!(delta > 0.0 && delta < 0.125))
    throw std::invalid_argument("delta must lie in (0, 1/8)");

  const int n = static_cast<int>(expectedMaxes.size());
  double s = 0.0;
  for (double e : expectedMaxes) {
    if (e < 0.0) throw std::invalid_argument("expectations must be nonnegative");
    s += e;
  }
  if (s <= 0.0)
    throw DegenerateInstanceError("all per-item expectations are zero");

  const double log2_arg =
      (16.0 * c * c / (eps * eps * eps)) * std::log(2.0 / delta);
  const int ell_star = static_cast<int>(std::ceil(std::log2(log2_arg) - 1e-12));

  Partition part;
  part.ellStar = ell_star;
  part.sHat = s;
  part.c = c;

  const double negligible = eps * s / (2.0 * n);
  for (int j = 0; j < n; ++j) {
    double e = expectedMaxes[j];
    if (e <= negligible) {
      part.T.push_back(j);
      continue;
    }
    // smallest ell >= 1 with E > s / 2^ell, i.e. E in (s/2^ell, s/2^{ell-1}]
    int ell = 1;
    double cell = s / 2.0;
    while (e <= cell) {
      cell /= 2.0;
      ++ell;
    }
    part.buckets[ell].push_back(j);
  }

  const double size_cut_base = 2.0 * c * c / (eps * eps);
  const double log_term = std::log(2.0 / delta);
  for (const auto& [ell, items] : part.buckets) {
    if (ell <= ell_star) {
      part.R.insert(part.R.end(), items.begin(), items.end());
    } else if (static_cast<double>(items.size()) >=
               size_cut_base * (log_term + (ell - ell_star))) {
      part.S.insert(part.S.end(), items.begin(), items.end());
    } else {
      part.T.insert(part.T.end(), items.begin(), items.end());
    }
  }
  std::sort(part.R.begin(), part.R.end());
  std::sort(part.S.begin(), part.S.end());
  std::sort(part.T.begin(), part.T.end());
  return part;
}

std::vector<double> expected_maxes(const AuctionInstance& instance, int samples,
                                   std::uint64_t seed) {
  std::vector<double> out(instance.items());
  for (int j = 0; j < instance.items(); ++j) {
    auto col = instance.column(j);
    out[j] = expected_max(col, samples, splitmix64(seed + j));
  }
  return out;
}

double estimate_s(const AuctionInstance& instance, int samples,
                  std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("estimate_s needs samples >= 1");
  double s = 0.0;
  for (double e : expected_maxes(instance, samples, seed)) s += e;
  return s;
}

}  // namespace auctionforge
