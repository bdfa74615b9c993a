#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "auctionforge/instance.hpp"

namespace auctionforge {

// All powers of (1+eps^2) inside [lo, hi], endpoints snapped outward so the
// grid covers the whole range. lo == hi degenerates to that single price.
std::vector<double> price_grid(double lo, double hi, double eps);

// Take-it-or-leave-it menu over item bundles for a single additive bidder.
// bundles are bitmasks over the items; the buyer picks a utility-maximizing
// entry (or nothing), ties toward the higher price.
struct BundleMenu {
  std::vector<std::uint32_t> bundles;
  std::vector<double> prices;
};

struct BundleSearchResult {
  BundleMenu menu;
  double revenue = 0.0;  // Monte Carlo estimate on the search sample set
};

struct BundleSearchOptions {
  // Price grids are powers of (1 + eps^2 / grid_refinement); 1 is the
  // standard grid, larger values refine it (for discretization-dominance
  // checks).
  int grid_refinement = 1;
  std::uint64_t menu_cap = 200000000;  // exhaustive search budget, in menus
  std::uint64_t seed = 12345;
};

// Exhaustive search over all bundle-price assignments with every price on its
// bundle's grid (ranges from per-bundle tail anchoring). Throws
// InstanceTooLargeError when the menu product exceeds the budget.
BundleSearchResult bundle_price_search(const AuctionInstance& instance,
                                       double eps, int samples,
                                       const BundleSearchOptions& opts = {});

// Cheap multi-start coordinate-ascent variant of the same search: optimizes
// one bundle price at a time until a pass makes no progress. Used where the
// exhaustive product is out of reach (e.g. refined oracle grids).
BundleSearchResult bundle_price_coordinate_search(
    const AuctionInstance& instance, double eps, int samples,
    const BundleSearchOptions& opts = {});

// Revenue of a fixed menu under the search's buyer model, on the sample set
// that (samples, seed) generates.
double bundle_menu_revenue(const AuctionInstance& instance,
                           const BundleMenu& menu, int samples,
                           std::uint64_t seed);

struct LotteryEntry {
  std::vector<double> q;  // per-item win probabilities
  double price = 0.0;
};

struct LotteryMenu {
  std::vector<LotteryEntry> entries;
};

struct LotterySearchResult {
  LotteryMenu menu;
  double revenue = 0.0;
  // The enumeration is exhaustive only within the menu-size cap; reports
  // should label the value accordingly.
  int menu_cap = 0;
};

struct LotterySearchOptions {
  std::uint64_t menu_budget = 2000000;  // menus evaluated before giving up
  std::uint64_t seed = 12345;
};

// {0} and eps^2 * (1+eps^2)^t <= 1 scaled by (1-eps), plus exact 1 so that
// deterministic bundles stay representable.
std::vector<double> lottery_probability_grid(double eps);

// Exhaustive search over menus of at most menu_cap (lottery, price) entries,
// probabilities on the lottery grid and prices on the price grid. Entries
// whose expected value is below an eps fraction of the expected welfare are
// pruned. Throws InstanceTooLargeError when the combination count exceeds the
// budget.
LotterySearchResult lottery_menu_search(const AuctionInstance& instance,
                                        double eps, int menu_cap, int samples,
                                        const LotterySearchOptions& opts = {});

}  // namespace auctionforge
