#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "auctionforge/menu.hpp"

using namespace auctionforge;

namespace {

AuctionInstance single(std::vector<ValueDistribution> items,
                       std::uint64_t seed = 3) {
  return AuctionInstance::population(1, std::move(items), 0.1, 0.05, seed);
}

}  // namespace

TEST_CASE("price grid counting") {
  double eps = 0.2;
  double step = 1.0 + eps * eps;
  auto four = price_grid(1.0, step * step * step, eps);
  CHECK(four.size() == 4);
  CHECK(four.front() == doctest::Approx(1.0));
  CHECK(four.back() == doctest::Approx(step * step * step));

  // ceil(ln 2 / ln 1.01) + 1 = 71 points
  auto many = price_grid(1.0, 2.0, 0.1);
  CHECK(many.size() == 71);
  CHECK(many.front() == doctest::Approx(1.0));
  CHECK(many.back() >= 2.0);

  auto one = price_grid(1.5, 1.5, 0.1);
  CHECK(one == std::vector<double>{1.5});

  CHECK_THROWS_AS(price_grid(2.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(price_grid(0.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("bundle search extracts point-mass instances in full") {
  auto res = bundle_price_search(
      single({ValueDistribution::point_mass(1.0), ValueDistribution::point_mass(2.0)}),
      0.1, 500);
  CHECK(res.revenue == doctest::Approx(3.0));
  // the winning entry is the grand bundle at its exact value
  REQUIRE(res.menu.bundles.size() == 3);
  CHECK(res.menu.prices[2] == doctest::Approx(3.0));
}

TEST_CASE("bundle search on a single coin item posts near 1") {
  auto res = bundle_price_search(
      single({ValueDistribution::discrete({1, 2}, {0.5, 0.5})}), 0.1, 2000);
  CHECK(res.revenue >= 0.95);
  CHECK(res.revenue <= 1.02);
}

TEST_CASE("search revenue agrees with direct menu evaluation") {
  auto inst = single({ValueDistribution::discrete({0.5, 1.5, 2.5}, {0.4, 0.4, 0.2}),
                      ValueDistribution::uniform(0.25, 1.25)});
  BundleSearchOptions opts;
  opts.seed = 91;
  auto res = bundle_price_search(inst, 0.12, 400, opts);
  double direct = bundle_menu_revenue(inst, res.menu, 400, opts.seed);
  CHECK(direct == doctest::Approx(res.revenue).epsilon(1e-12));

  auto ca = bundle_price_coordinate_search(inst, 0.12, 400, opts);
  double ca_direct = bundle_menu_revenue(inst, ca.menu, 400, opts.seed);
  CHECK(ca_direct == doctest::Approx(ca.revenue).epsilon(1e-12));
  // coordinate ascent never beats the exhaustive optimum on the same grid
  CHECK(ca.revenue <= res.revenue + 1e-9);
}

TEST_CASE("discretization dominance against a 10x finer grid") {
  RandomStream rng(17);
  const double eps = 0.1;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<ValueDistribution> items;
    for (int j = 0; j < 2; ++j) {
      double a = 0.5 + rng.next_unit(), b = a + 0.5 + 1.5 * rng.next_unit();
      double p = 0.3 + 0.4 * rng.next_unit();
      items.push_back(ValueDistribution::discrete({a, b}, {p, 1.0 - p}));
    }
    auto inst = single(std::move(items), 1000 + trial);

    BundleSearchOptions ours;
    ours.seed = 500 + trial;
    auto coarse = bundle_price_search(inst, eps, 300, ours);

    BundleSearchOptions fine = ours;
    fine.grid_refinement = 10;
    auto oracle = bundle_price_coordinate_search(inst, eps, 300, fine);

    CHECK(coarse.revenue >= (1.0 - 2.0 * eps) * oracle.revenue - 1e-9);
  }
}

TEST_CASE("bundle enumeration cap") {
  BundleSearchOptions opts;
  opts.menu_cap = 10;
  CHECK_THROWS_AS(
      bundle_price_search(single({ValueDistribution::uniform(0.5, 2.0),
                                  ValueDistribution::uniform(0.5, 2.0)}),
                          0.1, 100, opts),
      InstanceTooLargeError);
}

TEST_CASE("lottery probability grid for eps = 0.5") {
  auto grid = lottery_probability_grid(0.5);
  // {0} then 0.25 * 1.25^k scaled by 0.5, then the exact-1 bundle anchor
  REQUIRE(grid.size() >= 4);
  CHECK(grid[0] == 0.0);
  CHECK(grid[1] == doctest::Approx(0.125));
  CHECK(grid[2] == doctest::Approx(0.15625));
  CHECK(grid.back() == 1.0);
  for (std::size_t i = 1; i + 2 < grid.size(); ++i) {
    double unscaled = grid[i] / 0.5;
    CHECK(unscaled >= 0.25 - 1e-12);
    CHECK(unscaled <= 1.0 + 1e-12);
  }
}

TEST_CASE("lottery menus nest deterministic bundles") {
  // point masses: the single best lottery is the full bundle at price 3
  auto inst = single({ValueDistribution::point_mass(1.0),
                      ValueDistribution::point_mass(2.0)});
  auto bundle = bundle_price_search(inst, 0.2, 400);
  auto lottery = lottery_menu_search(inst, 0.2, 1, 400);
  CHECK(lottery.revenue == doctest::Approx(3.0));
  CHECK(lottery.revenue >= bundle.revenue - 1e-9);
  REQUIRE(lottery.menu.entries.size() == 1);
  CHECK(lottery.menu.entries[0].q == std::vector<double>{1.0, 1.0});

  // single item: lotteries generalize the posted bundle price (the price
  // grids share the (1+eps^2)-power chain, so the bundle optimum is available
  // as the q = 1 lottery)
  auto coin = single({ValueDistribution::discrete({1, 2}, {0.5, 0.5})});
  LotterySearchOptions lopts;
  lopts.seed = 12345;
  BundleSearchOptions bopts;
  bopts.seed = 12345;
  auto b = bundle_price_search(coin, 0.5, 1500, bopts);
  auto l = lottery_menu_search(coin, 0.5, 2, 1500, lopts);
  CHECK(l.revenue >= b.revenue - 0.02);
}

TEST_CASE("lottery search enforces its budget") {
  LotterySearchOptions opts;
  opts.menu_budget = 10;
  auto inst = single({ValueDistribution::discrete({1, 2}, {0.5, 0.5})});
  CHECK_THROWS_AS(lottery_menu_search(inst, 0.2, 3, 200, opts),
                  InstanceTooLargeError);
}
