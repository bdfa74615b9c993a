#include "auctionforge/menu.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "auctionforge/tail.hpp"

namespace auctionforge {

std::vector<double> price_grid(double lo, double hi, double eps) {
  if (!(lo > 0.0) || !(hi >= lo))
    throw std::invalid_argument("price_grid needs 0 < lo <= hi");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("price_grid needs eps in (0,1)");
  if (lo == hi) return {lo};

  const double base = std::log1p(eps * eps);
  int k_lo = static_cast<int>(std::floor(std::log(lo) / base + 1e-9));
  int k_hi = static_cast<int>(std::ceil(std::log(hi) / base - 1e-9));
  std::vector<double> grid;
  grid.reserve(k_hi - k_lo + 1);
  for (int k = k_lo; k <= k_hi; ++k)
    grid.push_back(std::pow(1.0 + eps * eps, k));
  return grid;
}

namespace {

constexpr double kTieTol = 1e-9;

struct SearchContext {
  int items = 0;
  int samples = 0;
  std::vector<std::uint32_t> bundles;            // masks, ascending
  std::vector<std::vector<double>> grids;        // per bundle
  std::vector<std::vector<double>> bundle_vals;  // [bundle][sample]
};

void require_single_bidder(const AuctionInstance& instance) {
  if (instance.bidders() != 1)
    throw std::invalid_argument("menu searches serve a single bidder");
}

// Sample item-value rows for the single bidder.
std::vector<std::vector<double>> sample_value_rows(
    const AuctionInstance& instance, int samples, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<std::vector<double>> rows(samples,
                                        std::vector<double>(instance.items()));
  for (auto& row : rows)
    for (int j = 0; j < instance.items(); ++j)
      row[j] = instance.marginal(0, j).sample(rng);
  return rows;
}

// Price range for a bundle: the tail-anchored truncation interval of the
// bundle total, clipped to the support bounds, and stretched down by (1-eps)
// so that the (1-eps) price-discretization shift stays inside
// the grid.
// The truncation interval is only defined for eps in (0, 1/4); menu searches
// accept larger eps for their grids, so the range uses a clamped value (a
// smaller eps only widens the interval).
std::pair<double, double> range_interval(double beta, double eps) {
  return truncation_interval(beta, std::min(eps, 0.24));
}

std::vector<double> bundle_grid(const AuctionInstance& instance,
                                std::uint32_t mask, double eps,
                                int grid_refinement, std::uint64_t seed) {
  std::vector<ValueDistribution> dists;
  double smin = 0.0, smax = 0.0;
  for (int j = 0; j < instance.items(); ++j) {
    if (mask & (1u << j)) {
      dists.push_back(instance.marginal(0, j));
      smin += dists.back().support_min();
      smax += dists.back().support_max();
    }
  }
  double beta = anchoring_point_of_sum(dists, seed);
  auto [tlo, thi] = range_interval(beta, eps);
  double lo = std::max(tlo, smin);
  double hi = std::min(thi, smax);
  if (!(lo < hi)) {
    double v = std::clamp(smax, tlo, thi);
    return {v};
  }
  double grid_eps = eps / std::sqrt(static_cast<double>(grid_refinement));
  return price_grid(lo * (1.0 - eps), hi, grid_eps);
}

SearchContext make_context(const AuctionInstance& instance, double eps,
                           int samples, const BundleSearchOptions& opts) {
  require_single_bidder(instance);
  if (instance.items() > 20)
    throw InstanceTooLargeError("too many items for bundle enumeration",
                                instance.items(), 20);
  SearchContext ctx;
  ctx.items = instance.items();
  ctx.samples = samples;
  auto rows = sample_value_rows(instance, samples, opts.seed);
  const std::uint32_t top = (1u << instance.items()) - 1;
  for (std::uint32_t mask = 1; mask <= top; ++mask) {
    ctx.bundles.push_back(mask);
    ctx.grids.push_back(bundle_grid(instance, mask, eps, opts.grid_refinement,
                                    splitmix64(opts.seed + mask)));
    std::vector<double> vals(samples, 0.0);
    for (int s = 0; s < samples; ++s)
      for (int j = 0; j < instance.items(); ++j)
        if (mask & (1u << j)) vals[s] += rows[s][j];
    ctx.bundle_vals.push_back(std::move(vals));
  }
  return ctx;
}

// Buyer best response against a full price assignment; ties go to the higher
// price. Returns mean payment.
double menu_revenue_on(const SearchContext& ctx,
                       const std::vector<double>& prices) {
  double total = 0.0;
  for (int s = 0; s < ctx.samples; ++s) {
    double best_u = 0.0, paid = 0.0;
    for (std::size_t b = 0; b < ctx.bundles.size(); ++b) {
      double u = ctx.bundle_vals[b][s] - prices[b];
      if (u > best_u + kTieTol) {
        best_u = u;
        paid = prices[b];
      } else if (u >= best_u - kTieTol && prices[b] > paid) {
        paid = prices[b];
      }
    }
    total += paid;
  }
  return total / ctx.samples;
}

struct SweepBest {
  double revenue = -1.0;
  std::uint64_t flat_index = ~0ULL;  // lexicographic menu id, for determinism
  std::vector<std::size_t> choice;   // per-bundle grid indices
};

void consider(SweepBest& best, double rev, std::uint64_t flat,
              const std::vector<std::size_t>& choice) {
  if (rev > best.revenue + 1e-15 ||
      (rev > best.revenue - 1e-15 && flat < best.flat_index)) {
    best.revenue = rev;
    best.flat_index = flat;
    best.choice = choice;
  }
}

// With all but the last bundle priced, the optimal last price comes from a
// threshold sweep: sample s buys the last bundle at price p iff p is below
// t_s = value_s(last) - (best utility among the fixed entries), with the tie
// going to the higher-priced side.
void sweep_last_bundle(const SearchContext& ctx,
                       const std::vector<std::size_t>& choice,
                       std::uint64_t flat_prefix, SweepBest& best) {
  const std::size_t last = ctx.bundles.size() - 1;
  const auto& grid = ctx.grids[last];
  const std::size_t g = grid.size();

  std::vector<double> diff_cnt(g + 1, 0.0), diff_alt(g + 1, 0.0);
  std::vector<double> tie_cnt(g, 0.0), tie_alt(g, 0.0);
  double alt_total = 0.0;

  for (int s = 0; s < ctx.samples; ++s) {
    double best_u = 0.0, alt = 0.0;
    for (std::size_t b = 0; b < last; ++b) {
      double u = ctx.bundle_vals[b][s] - ctx.grids[b][choice[b]];
      if (u > best_u + kTieTol) {
        best_u = u;
        alt = ctx.grids[b][choice[b]];
      } else if (u >= best_u - kTieTol && ctx.grids[b][choice[b]] > alt) {
        alt = ctx.grids[b][choice[b]];
      }
    }
    alt_total += alt;
    double t = ctx.bundle_vals[last][s] - best_u;
    // grid indices with price < t - tol buy outright
    std::size_t hi = static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), t - kTieTol) - grid.begin());
    diff_cnt[0] += 1.0;
    diff_cnt[hi] -= 1.0;
    diff_alt[0] += alt;
    diff_alt[hi] -= alt;
    if (hi < g && grid[hi] <= t + kTieTol && grid[hi] >= alt - kTieTol) {
      tie_cnt[hi] += 1.0;
      tie_alt[hi] += alt;
    }
  }

  double cnt = 0.0, alt_buy = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    cnt += diff_cnt[k];
    alt_buy += diff_alt[k];
    double buyers = cnt + tie_cnt[k];
    double alt_spent = alt_buy + tie_alt[k];
    double rev = (buyers * grid[k] + (alt_total - alt_spent)) / ctx.samples;
    std::vector<std::size_t> full = choice;
    full[last] = k;
    consider(best, rev, flat_prefix * g + k, full);
  }
}

BundleSearchResult result_from(const SearchContext& ctx, const SweepBest& best) {
  BundleSearchResult res;
  res.menu.bundles = ctx.bundles;
  res.menu.prices.resize(ctx.bundles.size());
  for (std::size_t b = 0; b < ctx.bundles.size(); ++b)
    res.menu.prices[b] = ctx.grids[b][best.choice[b]];
  res.revenue = best.revenue;
  return res;
}

}  // namespace

BundleSearchResult bundle_price_search(const AuctionInstance& instance,
                                       double eps, int samples,
                                       const BundleSearchOptions& opts) {
  SearchContext ctx = make_context(instance, eps, samples, opts);
  const std::size_t nb = ctx.bundles.size();

  double menus = 1.0;
  for (const auto& grid : ctx.grids) menus *= static_cast<double>(grid.size());
  if (!(menus <= static_cast<double>(opts.menu_cap)))
    throw InstanceTooLargeError(
        "bundle menu space exceeds the cap",
        menus > 1e18 ? ~0ULL : static_cast<std::uint64_t>(menus),
        opts.menu_cap);

  // Leaves = assignments to all bundles but the last; the last is swept.
  std::uint64_t leaves = 1;
  for (std::size_t b = 0; b + 1 < nb; ++b) leaves *= ctx.grids[b].size();

  const int workers = worker_count();
  std::vector<SweepBest> bests(workers);

#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::int64_t leaf = 0; leaf < static_cast<std::int64_t>(leaves); ++leaf) {
    int w = omp_in_parallel() ? omp_get_thread_num() : 0;
    std::vector<std::size_t> choice(nb, 0);
    std::uint64_t rest = static_cast<std::uint64_t>(leaf);
    for (std::size_t b = nb - 1; b-- > 0;) {
      choice[b] = rest % ctx.grids[b].size();
      rest /= ctx.grids[b].size();
    }
    sweep_last_bundle(ctx, choice, static_cast<std::uint64_t>(leaf), bests[w]);
  }

  SweepBest overall;
  for (const auto& b : bests)
    if (b.flat_index != ~0ULL) consider(overall, b.revenue, b.flat_index, b.choice);
  return result_from(ctx, overall);
}

BundleSearchResult bundle_price_coordinate_search(
    const AuctionInstance& instance, double eps, int samples,
    const BundleSearchOptions& opts) {
  SearchContext ctx = make_context(instance, eps, samples, opts);
  const std::size_t nb = ctx.bundles.size();

  // Deterministic starts: everything at the top of its grid; everything at
  // its standalone optimum; additive prices built from the singleton optima.
  auto standalone_best = [&](std::size_t b) {
    std::size_t best_k = 0;
    double best_rev = -1.0;
    for (std::size_t k = 0; k < ctx.grids[b].size(); ++k) {
      double p = ctx.grids[b][k];
      double rev = 0.0;
      for (int s = 0; s < ctx.samples; ++s)
        if (ctx.bundle_vals[b][s] >= p - kTieTol) rev += p;
      if (rev > best_rev + 1e-15) {
        best_rev = rev;
        best_k = k;
      }
    }
    return best_k;
  };

  std::vector<std::vector<std::size_t>> starts;
  starts.emplace_back(nb);
  for (std::size_t b = 0; b < nb; ++b) starts[0][b] = ctx.grids[b].size() - 1;
  starts.emplace_back(nb);
  for (std::size_t b = 0; b < nb; ++b) starts[1][b] = standalone_best(b);
  {
    // additive start: price of a bundle ~ sum of its singleton prices,
    // snapped down onto the bundle grid
    std::vector<double> singleton(ctx.items, 0.0);
    for (std::size_t b = 0; b < nb; ++b)
      if ((ctx.bundles[b] & (ctx.bundles[b] - 1)) == 0) {
        int j = static_cast<int>(std::countr_zero(ctx.bundles[b]));
        singleton[j] = ctx.grids[b][standalone_best(b)];
      }
    std::vector<std::size_t> add(nb, 0);
    for (std::size_t b = 0; b < nb; ++b) {
      double target = 0.0;
      for (int j = 0; j < ctx.items; ++j)
        if (ctx.bundles[b] & (1u << j)) target += singleton[j];
      const auto& grid = ctx.grids[b];
      auto it = std::upper_bound(grid.begin(), grid.end(), target);
      add[b] = it == grid.begin()
                   ? 0
                   : static_cast<std::size_t>(it - grid.begin()) - 1;
    }
    starts.push_back(std::move(add));
  }

  SweepBest overall;
  for (auto& choice : starts) {
    std::vector<double> prices(nb);
    for (std::size_t b = 0; b < nb; ++b) prices[b] = ctx.grids[b][choice[b]];
    double rev = menu_revenue_on(ctx, prices);
    for (int pass = 0; pass < 12; ++pass) {
      bool improved = false;
      for (std::size_t b = 0; b < nb; ++b) {
        std::size_t best_k = choice[b];
        double best_rev = rev;
        for (std::size_t k = 0; k < ctx.grids[b].size(); ++k) {
          prices[b] = ctx.grids[b][k];
          double r = menu_revenue_on(ctx, prices);
          if (r > best_rev + 1e-12) {
            best_rev = r;
            best_k = k;
          }
        }
        if (best_k != choice[b]) improved = true;
        choice[b] = best_k;
        prices[b] = ctx.grids[b][best_k];
        rev = best_rev;
      }
      if (!improved) break;
    }
    std::uint64_t flat = 0;
    for (std::size_t b = 0; b < nb; ++b)
      flat = flat * ctx.grids[b].size() + choice[b];
    consider(overall, rev, flat, choice);
  }
  return result_from(ctx, overall);
}

double bundle_menu_revenue(const AuctionInstance& instance,
                           const BundleMenu& menu, int samples,
                           std::uint64_t seed) {
  require_single_bidder(instance);
  auto rows = sample_value_rows(instance, samples, seed);
  double total = 0.0;
  for (const auto& row : rows) {
    double best_u = 0.0, paid = 0.0;
    for (std::size_t b = 0; b < menu.bundles.size(); ++b) {
      double v = 0.0;
      for (int j = 0; j < instance.items(); ++j)
        if (menu.bundles[b] & (1u << j)) v += row[j];
      double u = v - menu.prices[b];
      if (u > best_u + kTieTol) {
        best_u = u;
        paid = menu.prices[b];
      } else if (u >= best_u - kTieTol && menu.prices[b] > paid) {
        paid = menu.prices[b];
      }
    }
    total += paid;
  }
  return total / samples;
}

std::vector<double> lottery_probability_grid(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("lottery grid needs eps in (0,1)");
  std::vector<double> grid = {0.0};
  for (double q = eps * eps; q <= 1.0 + 1e-12; q *= 1.0 + eps * eps)
    grid.push_back((1.0 - eps) * std::min(q, 1.0));
  grid.push_back(1.0);  // keeps deterministic bundles inside the menu family
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());
  return grid;
}

LotterySearchResult lottery_menu_search(const AuctionInstance& instance,
                                        double eps, int menu_cap, int samples,
                                        const LotterySearchOptions& opts) {
  require_single_bidder(instance);
  if (menu_cap < 1) throw std::invalid_argument("menu_cap must be >= 1");
  const int n = instance.items();
  if (n > 16)
    throw InstanceTooLargeError("too many items for lottery enumeration", n, 16);

  auto rows = sample_value_rows(instance, samples, opts.seed);
  std::vector<double> q_grid = lottery_probability_grid(eps);

  // Price range from the grand-bundle anchor, stretched down to the smallest
  // lottery scale.
  std::vector<ValueDistribution> all;
  double smin = 0.0, smax = 0.0, expected_welfare = 0.0;
  for (int j = 0; j < n; ++j) {
    all.push_back(instance.marginal(0, j));
    smin += all.back().support_min();
    smax += all.back().support_max();
    expected_welfare += all.back().expectation();
  }
  double beta = anchoring_point_of_sum(all, opts.seed);
  auto [tlo, thi] = range_interval(beta, eps);
  double lo = std::max(tlo, smin);
  double hi = std::min(thi, smax);
  if (!(lo < hi)) lo = hi = std::clamp(smax, tlo, thi);
  double floor_price = std::max(lo * eps * eps * (1.0 - eps), 1e-9);
  std::vector<double> p_grid =
      lo == hi ? std::vector<double>{hi} : price_grid(floor_price, hi, eps);

  // Entry candidates: q vectors over the grid, paired with every grid price.
  // Lotteries worth less than an eps fraction of the expected welfare are
  // dropped ("invaluable"), as are prices no realized value can reach.
  struct QCombo {
    std::vector<double> q;
    std::vector<double> value;  // per sample
    double max_value = 0.0;
  };
  struct Entry {
    std::size_t q_index;
    double price;
  };
  std::vector<QCombo> qcombos;
  std::vector<Entry> entries;
  const std::size_t qn = q_grid.size();
  double q_combo_count = std::pow(static_cast<double>(qn), n);
  if (!(q_combo_count <= 2e6))
    throw InstanceTooLargeError("lottery probability space exceeds the cap",
                                static_cast<std::uint64_t>(q_combo_count),
                                2000000ULL);

  for (std::uint64_t combo = 0;
       combo < static_cast<std::uint64_t>(q_combo_count); ++combo) {
    std::uint64_t rest = combo;
    std::vector<double> q(n);
    bool all_zero = true;
    for (int j = 0; j < n; ++j) {
      q[j] = q_grid[rest % qn];
      rest /= qn;
      all_zero = all_zero && q[j] == 0.0;
    }
    if (all_zero) continue;
    double ev = 0.0, vmax = 0.0;
    for (int j = 0; j < n; ++j) {
      ev += q[j] * instance.marginal(0, j).expectation();
      vmax += q[j] * instance.marginal(0, j).support_max();
    }
    if (ev < eps * expected_welfare) continue;  // invaluable lottery

    QCombo qc;
    qc.q = q;
    qc.max_value = vmax;
    qc.value.assign(samples, 0.0);
    for (int s = 0; s < samples; ++s)
      for (int j = 0; j < n; ++j) qc.value[s] += q[j] * rows[s][j];
    std::size_t qi = qcombos.size();
    qcombos.push_back(std::move(qc));
    for (double price : p_grid) {
      if (price > vmax + 1e-12) continue;  // unaffordable at any realization
      entries.push_back({qi, price});
    }
  }

  // Menus of size 1..menu_cap, enumerated lexicographically.
  const std::size_t ecount = entries.size();
  double combos = 0.0;
  double choose = 1.0;
  for (int k = 1; k <= menu_cap; ++k) {
    choose = choose * static_cast<double>(ecount - (k - 1)) / k;
    combos += choose;
  }
  if (!(combos <= static_cast<double>(opts.menu_budget)))
    throw InstanceTooLargeError("lottery menu space exceeds the budget",
                                combos > 1e18 ? ~0ULL
                                              : static_cast<std::uint64_t>(combos),
                                opts.menu_budget);

  double best_rev = -1.0;
  std::vector<std::size_t> best_menu;

  auto eval_menu = [&](const std::vector<std::size_t>& menu) {
    double total = 0.0;
    for (int s = 0; s < samples; ++s) {
      double best_u = 0.0, paid = 0.0;
      for (std::size_t e : menu) {
        double u = qcombos[entries[e].q_index].value[s] - entries[e].price;
        if (u > best_u + kTieTol) {
          best_u = u;
          paid = entries[e].price;
        } else if (u >= best_u - kTieTol && entries[e].price > paid) {
          paid = entries[e].price;
        }
      }
      total += paid;
    }
    return total / samples;
  };

  std::vector<std::size_t> menu;
  auto recurse = [&](auto&& self, std::size_t from, int remaining) -> void {
    if (!menu.empty()) {
      double rev = eval_menu(menu);
      if (rev > best_rev + 1e-15) {
        best_rev = rev;
        best_menu = menu;
      }
    }
    if (remaining == 0) return;
    for (std::size_t e = from; e < ecount; ++e) {
      menu.push_back(e);
      self(self, e + 1, remaining - 1);
      menu.pop_back();
    }
  };
  recurse(recurse, 0, menu_cap);

  LotterySearchResult res;
  res.menu_cap = menu_cap;
  res.revenue = std::max(best_rev, 0.0);
  for (std::size_t e : best_menu)
    res.menu.entries.push_back(
        {qcombos[entries[e].q_index].q, entries[e].price});
  return res;
}

}  // namespace auctionforge
