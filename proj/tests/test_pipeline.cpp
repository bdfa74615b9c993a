#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "auctionforge/audit.hpp"
#include "auctionforge/pipeline.hpp"

using namespace auctionforge;

TEST_CASE("build requires MHR or a bounded support ratio") {
  // decreasing hazard and an atom at zero: fails both predicates
  auto wild = ValueDistribution::discrete({0.0, 1.0, 3.0}, {0.5, 0.1, 0.4});
  auto inst = AuctionInstance::population(2, {wild}, 0.2, 0.1, 7);
  CHECK_THROWS_AS(build_ptas_mechanism(inst), std::invalid_argument);

  // the same hazard shape away from zero has a finite ratio and is accepted
  auto tame = ValueDistribution::discrete({1.0, 2.0, 4.0}, {0.5, 0.1, 0.4});
  auto ok = AuctionInstance::population(2, {tame}, 0.2, 0.1, 7);
  CHECK_NOTHROW(build_ptas_mechanism(ok));
}

TEST_CASE("dispatch threshold") {
  bool capped = false;
  // 12/eps = 2 -> 2^2 = 4
  CHECK(dispatch_threshold(6.0, std::nullopt, &capped) == 4);
  CHECK_FALSE(capped);
  // small eps overflows and caps at 1e6
  CHECK(dispatch_threshold(0.1, std::nullopt, &capped) == 1000000);
  CHECK(capped);
  // override wins
  CHECK(dispatch_threshold(0.1, 17, &capped) == 17);
}

TEST_CASE("population dispatch builds per-item reserves") {
  auto coin = ValueDistribution::discrete({1, 2}, {0.5, 0.5});
  auto inst = AuctionInstance::population(3, {coin, coin}, 0.2, 0.05, 7);
  BuildOptions opts;
  opts.dispatch_threshold_override = 2;  // force the population route
  auto built = build_ptas_mechanism(inst, opts);
  CHECK(built.metadata.at("route") == "population_reserve");
  CHECK(built.mechanism->name() == "second_price_reserve");
  auto mech_json = built.mechanism->to_json();
  REQUIRE(mech_json.at("reserves").size() == 2);
  // iid_reserve on 3 coin bidders: r = 2 with guarantee 2 * (1 - 1/8)
  CHECK(mech_json.at("reserves")[0].get<double>() == doctest::Approx(2.0));
  CHECK(built.metadata.at("perItem")[0].at("guarantee").get<double>() ==
        doctest::Approx(2.0 * (1.0 - 0.125)));
}

TEST_CASE("partition route composes blocks") {
  auto coin = ValueDistribution::discrete({1, 2}, {0.5, 0.5});
  auto tiny = ValueDistribution::discrete({1e-8, 2e-8}, {0.5, 0.5});
  auto inst = AuctionInstance::population(2, {coin, coin, tiny}, 0.2, 0.1, 7);
  BuildOptions opts;
  opts.concept_kind = SolutionConcept::BIC;
  auto built = build_ptas_mechanism(inst, opts);
  CHECK(built.metadata.at("route") == "partition");
  CHECK(built.mechanism->name() == "combined");
  // the negligible item lands in T and is never allocated
  auto part = built.metadata.at("partition");
  REQUIRE(part.at("T").size() == 1);
  CHECK(part.at("T")[0] == 2);
  // R block solved by LP with the objective recorded
  CHECK(built.metadata.at("rBlock").at("solver") == "lp");
  CHECK(built.metadata.at("rBlock").at("lpObjective").get<double>() > 0.0);

  BidProfile bids(2, 3);
  bids.bids = {2, 2, 5, 1, 1, 5};
  auto out = built.mechanism->run(bids);
  CHECK(out.alloc[0 * 3 + 2] == 0.0);
  CHECK(out.alloc[1 * 3 + 2] == 0.0);
}

TEST_CASE("single bidder instance reduces to a grand-bundle style block") {
  auto inst = AuctionInstance::population(
      1, {ValueDistribution::discrete({1, 2}, {0.5, 0.5})}, 0.2, 0.1, 7);
  BuildOptions opts;
  opts.concept_kind = SolutionConcept::IC;
  auto built = build_ptas_mechanism(inst, opts);
  // one high-expectation item: everything sits in R, solved exactly
  CHECK(built.metadata.at("partition").at("R").size() == 1);
  auto est = estimate(*built.mechanism, inst, 20000, 5);
  CHECK(est.revenueMean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("combined mechanism beats its blocks on revenue") {
  auto coin = ValueDistribution::discrete({1, 2}, {0.5, 0.5});
  auto inst = AuctionInstance::population(2, {coin, coin}, 0.2, 0.1, 7);
  BuildOptions opts;
  opts.concept_kind = SolutionConcept::IC;
  auto built = build_ptas_mechanism(inst, opts);
  auto est = estimate(*built.mechanism, inst, 20000, 5);
  // both items end up in R for this tiny instance; the combined revenue must
  // be at least the better single-item posted revenue (1.0 per item)
  CHECK(est.revenueMean >= 1.0 - 3.0 * est.revenueCI95 / 1.96);

  // metadata replays into an identical mechanism
  auto replay = mechanism_from_json(built.metadata.at("mechanism"));
  auto est2 = estimate(*replay, inst, 20000, 5);
  CHECK(est2.revenueMean == est.revenueMean);
}

TEST_CASE("continuous R blocks coarsen onto the grid as eps-variants") {
  auto inst = AuctionInstance::population(
      1, {ValueDistribution::uniform(0.5, 1.5)}, 0.24, 0.1, 7);
  BuildOptions opts;
  opts.concept_kind = SolutionConcept::IC;
  auto built = build_ptas_mechanism(inst, opts);
  REQUIRE_FALSE(built.warnings.empty());
  CHECK(built.metadata.at("rBlock").at("solver") == "lp");

  // the realized mechanism only carries the eps guarantee
  auto mech_json = built.metadata.at("mechanism");
  CHECK(mech_json.at("m1").at("concept") == "eps-ic");

  // optimal posted revenue for this marginal is 0.5625; the coarsened table
  // lands within the (1+eps) rounding loss and stays IR
  auto est = estimate(*built.mechanism, inst, 20000, 5);
  CHECK(est.revenueMean >= 0.5625 / 1.24 - 0.02);
  CHECK(est.revenueMean <= 0.5625 + 0.02);
  CHECK(check_ir(*built.mechanism, inst, 5000, 5).violations == 0);
  DeviationGrid grid;
  double regret = estimate_regret(*built.mechanism, inst, SolutionConcept::EpsIC,
                                  grid, 2000, 5)
                      .maxObserved;
  CHECK(regret <= 0.35);  // one (1+eps) grid cell at the top of the range
}

TEST_CASE("ptas mechanism is truthful and IR end to end") {
  auto coin = ValueDistribution::discrete({1, 2}, {0.5, 0.5});
  auto inst = AuctionInstance::population(2, {coin, coin}, 0.2, 0.1, 7);
  BuildOptions opts;
  opts.concept_kind = SolutionConcept::IC;
  auto built = build_ptas_mechanism(inst, opts);
  CHECK(check_ir(*built.mechanism, inst, 3000, 5).violations == 0);
  DeviationGrid grid;
  grid.extra_values = {1.0, 2.0};
  CHECK(estimate_regret(*built.mechanism, inst, SolutionConcept::IC, grid,
                        2000, 5)
            .maxObserved <= 1e-6);
}
