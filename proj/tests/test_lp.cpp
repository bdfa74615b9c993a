#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "auctionforge/lp.hpp"

using namespace auctionforge;

namespace {

AuctionInstance coin_instance(int bidders) {
  return AuctionInstance::population(
      bidders, {ValueDistribution::discrete({1, 2}, {0.5, 0.5})}, 0.1, 0.05, 3);
}

// Optimal posted price for a single bidder and a single item: the best
// support price by direct scan, the known optimum for this case.
double posted_price_oracle(const ValueDistribution& dist) {
  double best = 0.0;
  for (double p : dist.support()) {
    double tail = 1.0 - dist.cdf_below(p);
    best = std::max(best, p * tail);
  }
  return best;
}

// Exact expected revenue of a second-price auction with reserve r for m
// i.i.d. bidders on one discrete item, by profile enumeration.
double reserve_auction_revenue(const ValueDistribution& dist, int m, double r) {
  std::vector<std::uint64_t> digits(m, 0);
  const auto& sup = dist.support();
  const auto& pr = dist.probs();
  double total = 0.0;
  bool done = false;
  while (!done) {
    double prob = 1.0;
    double best = -1.0, second = 0.0;
    for (int i = 0; i < m; ++i) {
      prob *= pr[digits[i]];
      double b = sup[digits[i]];
      if (b > best) {
        second = std::max(second, best);
        best = b;
      } else {
        second = std::max(second, b);
      }
    }
    if (best >= r) total += prob * std::max(r, std::max(second, 0.0));
    int pos = m - 1;
    while (pos >= 0 && ++digits[pos] == sup.size()) digits[pos--] = 0;
    done = pos < 0;
  }
  return total;
}

}  // namespace

TEST_CASE("build_lp counts") {
  auto one = coin_instance(1);
  LPModel m1 = build_lp(one, SolutionConcept::IC);
  CHECK(m1.space.profiles == 2);
  CHECK(m1.num_variables == 4);
  CHECK(m1.supply_rows == 2);
  CHECK(m1.ir_rows == 2);
  CHECK(m1.ic_rows == 2);

  auto two = coin_instance(2);
  LPModel m2 = build_lp(two, SolutionConcept::IC);
  CHECK(m2.space.profiles == 4);
  CHECK(m2.num_variables == 16);  // profiles * (m*n + m)
  CHECK(m2.supply_rows == 4);
  CHECK(m2.ir_rows == 8);
  CHECK(m2.ic_rows == 8);  // m * profiles * (types - 1)

  auto point = AuctionInstance::population(
      2, {ValueDistribution::point_mass(3.0)}, 0.1, 0.05, 3);
  LPModel mp = build_lp(point, SolutionConcept::IC);
  CHECK(mp.space.profiles == 1);
  CHECK(mp.ic_rows == 0);

  CHECK_THROWS_AS(build_lp(coin_instance(2), SolutionConcept::IC, 10),
                  InstanceTooLargeError);
}

TEST_CASE("solve_lp matches known optima") {
  LPSolution one = solve_lp(build_lp(coin_instance(1), SolutionConcept::IC));
  CHECK(one.objective == doctest::Approx(1.0).epsilon(1e-7));

  auto point = AuctionInstance::population(
      1, {ValueDistribution::point_mass(3.0)}, 0.1, 0.05, 3);
  LPSolution full = solve_lp(build_lp(point, SolutionConcept::IC));
  CHECK(full.objective == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("two-bidder BIC objective hits the reserve-auction oracle") {
  auto coin = ValueDistribution::discrete({1, 2}, {0.5, 0.5});
  LPSolution bic = solve_lp(build_lp(coin_instance(2), SolutionConcept::BIC));
  CHECK(bic.objective >= 1.5 - 1e-7);

  // fine reserve grid plus the support points; the instance is regular, so
  // the best reserve auction is the true optimum
  double oracle = 0.0;
  for (int k = 0; k <= 2000; ++k)
    oracle = std::max(oracle,
                      reserve_auction_revenue(coin, 2, 0.5 + 2.0 * k / 2000.0));
  CHECK(oracle == doctest::Approx(1.5));
  CHECK(bic.objective == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("single bidder single item LP equals the posted-price oracle") {
  RandomStream rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    int sz = 2 + static_cast<int>(rng.next_u64() % 3);
    std::vector<double> sup, pr;
    double v = 0.0, rest = 1.0;
    for (int i = 0; i < sz; ++i) {
      v += 0.25 + 2.0 * rng.next_unit();
      sup.push_back(v);
      double p = i + 1 == sz ? rest : rest * (0.2 + 0.6 * rng.next_unit());
      pr.push_back(p);
      rest -= p;
    }
    auto dist = ValueDistribution::discrete(sup, pr);
    auto inst = AuctionInstance::population(1, {dist}, 0.1, 0.05, trial);
    LPSolution sol = solve_lp(build_lp(inst, SolutionConcept::IC));
    CHECK(sol.objective == doctest::Approx(posted_price_oracle(dist)).epsilon(1e-6));
  }
}

TEST_CASE("BIC relaxation never loses to IC") {
  RandomStream rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::vector<ValueDistribution>> cols;
    int n = 1 + static_cast<int>(rng.next_u64() % 2);
    for (int j = 0; j < n; ++j) {
      std::vector<ValueDistribution> col;
      for (int i = 0; i < 2; ++i) {
        double a = 0.5 + rng.next_unit(), b = a + 0.5 + rng.next_unit();
        double p = 0.2 + 0.6 * rng.next_unit();
        col.push_back(ValueDistribution::discrete({a, b}, {p, 1 - p}));
      }
      cols.push_back(std::move(col));
    }
    auto inst = AuctionInstance::general(2, cols, 0.1, 0.05, trial);
    double ic = solve_lp(build_lp(inst, SolutionConcept::IC)).objective;
    double bic = solve_lp(build_lp(inst, SolutionConcept::BIC)).objective;
    CHECK(bic >= ic - 1e-7);
  }
}

TEST_CASE("lp mechanism reproduces the LP objective over the profile space") {
  auto inst = coin_instance(2);
  LPModel model = build_lp(inst, SolutionConcept::IC);
  LPSolution sol = solve_lp(model);
  auto mech = lp_mechanism(model, sol);

  double revenue = 0.0;
  for (std::uint64_t p = 0; p < model.space.profiles; ++p) {
    auto values = model.space.profile_values(p);
    BidProfile bids(2, 1);
    bids.bids = values;
    revenue += model.space.profile_prob(p) * mech->run(bids).revenue();
  }
  CHECK(revenue == doctest::Approx(sol.objective).epsilon(1e-7));
}

TEST_CASE("lp export is stable and carries named rows") {
  auto inst = coin_instance(1);
  LPModel model = build_lp(inst, SolutionConcept::IC);
  std::string a = export_lp_text(model);
  std::string b = export_lp_text(build_lp(inst, SolutionConcept::IC));
  CHECK(a == b);
  CHECK(a.find("maximize:") != std::string::npos);
  CHECK(a.find("supply[0,0]:") != std::string::npos);
  CHECK(a.find("ir[1,0]:") != std::string::npos);
  CHECK(a.find("ic[0]:") != std::string::npos);
}

TEST_CASE("eps-dt search on tiny instances") {
  // point mass: full extraction, regret 0
  auto point = AuctionInstance::population(
      1, {ValueDistribution::point_mass(3.0)}, 0.1, 0.05, 3);
  EpsDtResult p = eps_dt_search(point, 0.5);
  CHECK(p.objective == doctest::Approx(3.0).epsilon(1e-7));

  // coin: matches the LP optimum (the optimum is deterministic here)
  EpsDtResult c = eps_dt_search(coin_instance(1), 0.5);
  CHECK(c.objective == doctest::Approx(1.0).epsilon(1e-7));

  // the realized mechanism rounds a 1.7 bid down to 1.5 on the eps-grid
  auto off = AuctionInstance::population(
      1, {ValueDistribution::discrete({1.7}, {1.0})}, 0.1, 0.05, 3);
  EpsDtResult o = eps_dt_search(off, 0.5);
  CHECK(o.objective == doctest::Approx(1.5).epsilon(1e-7));

  // enumeration cap
  CHECK_THROWS_AS(eps_dt_search(coin_instance(2), 0.5, 2),
                  InstanceTooLargeError);
}

TEST_CASE("deterministic tables never beat the IC relaxation") {
  RandomStream rng(66);
  for (int trial = 0; trial < 5; ++trial) {
    // supports already on the eps grid, so both solvers see the same types
    double eps = 0.5;
    std::vector<double> sup = {0.5 + 0.5 * (rng.next_u64() % 3),
                               2.0 + 0.5 * (rng.next_u64() % 3)};
    double p = 0.3 + 0.4 * rng.next_unit();
    auto dist = ValueDistribution::discrete(sup, {p, 1 - p});
    auto inst = AuctionInstance::population(1, {dist}, 0.1, 0.05, trial);
    double ic = solve_lp(build_lp(inst, SolutionConcept::IC)).objective;
    double dt = eps_dt_search(inst, eps).objective;
    CHECK(dt <= ic + 1e-7);
  }
}
