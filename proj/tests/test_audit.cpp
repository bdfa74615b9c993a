#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "auctionforge/audit.hpp"
#include "auctionforge/lp.hpp"

using namespace auctionforge;

namespace {

AuctionInstance coin_instance(int bidders) {
  return AuctionInstance::population(
      bidders, {ValueDistribution::discrete({1, 2}, {0.5, 0.5})}, 0.1, 0.05, 3);
}

}  // namespace

TEST_CASE("estimate converges to enumeration values") {
  auto inst = coin_instance(2);
  auto mech = second_price_reserve({2.0});
  auto est = estimate(*mech, inst, 20000, 7);
  // exact enumeration: revenue 1.5, welfare E[max] = 1.75
  CHECK(std::abs(est.revenueMean - 1.5) <= 3.0 * est.revenueCI95 / 1.96 + 1e-9);
  CHECK(est.welfareMean == doctest::Approx(1.75).epsilon(0.02));
  CHECK(est.revenueMean <= est.welfareMean + 1e-9);

  // a reserve above any possible welfare sells nothing
  auto idle = estimate(*grand_bundle(100.0), coin_instance(1), 500, 7);
  CHECK(idle.revenueMean == 0.0);
}

TEST_CASE("parallel kernel matches the serial reference bit for bit") {
  auto inst = coin_instance(2);
  auto mech = second_price_reserve({1.0});
  set_worker_count(4);
  auto par = estimate(*mech, inst, 5000, 11);
  set_worker_count(0);
  auto ser = estimate_serial(*mech, inst, 5000, 11);
  CHECK(par.revenueMean == ser.revenueMean);
  CHECK(par.revenueCI95 == ser.revenueCI95);
  CHECK(par.welfareMean == ser.welfareMean);
  CHECK(par.revenueSamples == ser.revenueSamples);
}

TEST_CASE("ir audit") {
  auto inst = coin_instance(2);
  CHECK(check_ir(*reserve_welfare(1.5), inst, 3000, 5).violations == 0);
  CHECK(check_ir(*second_price_reserve({1.0}), inst, 3000, 5).violations == 0);

  auto broken = check_ir(*broken_overcharger(1), inst, 3000, 5);
  CHECK(broken.violations > 0);
  CHECK(broken.worstMargin < -0.5);  // a loser pays 1 for nothing

  // subset restriction keeps utilities nonnegative even though payments can
  // go negative
  auto priors = AuctionInstance::population(
      2,
      {ValueDistribution::discrete({1, 2}, {0.5, 0.5}),
       ValueDistribution::discrete({0.5, 1.5}, {0.5, 0.5})},
      0.1, 0.05, 3);
  auto restricted =
      restrict_to_subset(second_price_reserve({1.0, 0.5}), {0}, priors, 99);
  auto sub = priors.restrict_items({0});
  CHECK(check_ir(*restricted, sub, 3000, 5).violations == 0);
}

TEST_CASE("regret audit clears truthful rules and flags the broken one") {
  auto inst = coin_instance(2);
  DeviationGrid grid;
  CHECK(estimate_regret(*reserve_welfare(1.5), inst, SolutionConcept::DT, grid,
                        3000, 5)
            .maxObserved <= 1e-9);
  CHECK(estimate_regret(*second_price_reserve({1.0}), inst, SolutionConcept::DT,
                        grid, 3000, 5)
            .maxObserved <= 1e-9);
  CHECK(estimate_regret(*grand_bundle(2.0), coin_instance(1),
                        SolutionConcept::DT, grid, 3000, 5)
            .maxObserved <= 1e-9);

  // pay-your-bid: shading 5% below the true value gains when you still win
  double fp = estimate_regret(*broken_first_price(1), inst, SolutionConcept::DT,
                              grid, 3000, 5)
                  .maxObserved;
  CHECK(fp > 0.01);
}

TEST_CASE("eps-dt mechanism regret stays within its eps") {
  auto inst = coin_instance(1);
  EpsDtResult res = eps_dt_search(inst, 0.5);
  DeviationGrid grid;
  grid.extra_values = {0.5, 1.0, 1.5, 2.0};  // the coarsening grid
  double regret = estimate_regret(*res.mechanism, inst, SolutionConcept::EpsDT,
                                  grid, 2000, 5)
                      .maxObserved;
  CHECK(regret <= 0.5 + 1e-9);
}

TEST_CASE("bic regret of the BIC-optimal table is solver noise") {
  auto inst = coin_instance(2);
  LPModel model = build_lp(inst, SolutionConcept::BIC);
  LPSolution sol = solve_lp(model);
  auto mech = lp_mechanism(model, sol);
  DeviationGrid grid;
  double regret = estimate_regret(*mech, inst, SolutionConcept::BIC, grid, 64,
                                  5, 2000)
                      .maxObserved;
  CHECK(regret <= 1e-6);
}

TEST_CASE("concentration checks") {
  std::vector<double> constant(2000, 3.0);
  auto c = check_concentration(constant, 0.01, 0.001);
  CHECK(c.passed);
  CHECK(c.empiricalFraction == 1.0);

  RandomStream rng(5);
  std::vector<double> sums(3000, 0.0);
  for (auto& s : sums)
    for (int i = 0; i < 100; ++i) s += rng.next_unit();
  auto good = check_concentration(sums, 0.2, 0.05);
  CHECK(good.passed);

  std::vector<double> singles(3000);
  for (auto& s : singles) s = rng.next_unit();
  auto bad = check_concentration(singles, 0.1, 0.05);
  CHECK_FALSE(bad.passed);
  CHECK(bad.empiricalFraction < 0.2);

  std::vector<double> few(10, 1.0);
  CHECK_THROWS_AS(check_concentration(few, 0.1, 0.05), std::invalid_argument);
}

TEST_CASE("LP optimum upper-bounds simulated mechanisms") {
  auto inst = coin_instance(2);
  double opt = solve_lp(build_lp(inst, SolutionConcept::BIC)).objective;
  for (MechanismPtr mech :
       {second_price_reserve({2.0}), second_price_reserve({1.0}),
        reserve_welfare(1.5)}) {
    auto est = estimate(*mech, inst, 20000, 13);
    CHECK(est.revenueMean <= opt + 3.0 * est.revenueCI95 / 1.96 + 1e-9);
  }
}

TEST_CASE("full audit report and alarms") {
  auto inst = coin_instance(2);
  AuditOptions opts;
  opts.samples = 2000;
  opts.seed = 21;

  auto good = run_audit(*reserve_welfare(1.5), inst, opts);
  CHECK_FALSE(good.alarm);
  CHECK(good.irViolations == 0);
  CHECK(good.regretMaxObserved <= 1e-9);
  CHECK(good.revenueToWelfare > 0.0);

  auto cheat = run_audit(*broken_overcharger(1), inst, opts);
  CHECK(cheat.alarm);
  auto shade = run_audit(*broken_first_price(1), inst, opts);
  CHECK(shade.alarm);

  // reports serialize deterministically and the CSV row is stable
  CHECK(good.to_json() == run_audit(*reserve_welfare(1.5), inst, opts).to_json());
  CHECK(good.csv_row() ==
        run_audit(*reserve_welfare(1.5), inst, opts).csv_row());
  CHECK(AuditReport::csv_header().find("revenueMean") != std::string::npos);
}

TEST_CASE("audit reports are thread-count independent") {
  auto inst = coin_instance(2);
  AuditOptions opts;
  opts.samples = 3000;
  opts.seed = 33;
  set_worker_count(1);
  auto one = run_audit(*reserve_welfare(1.5), inst, opts);
  set_worker_count(4);
  auto four = run_audit(*reserve_welfare(1.5), inst, opts);
  set_worker_count(0);
  CHECK(one.to_json().dump() == four.to_json().dump());
}
