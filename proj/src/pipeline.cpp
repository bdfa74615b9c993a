#include "auctionforge/pipeline.hpp"

#include <cmath>

#include "auctionforge/tail.hpp"

namespace auctionforge {

std::uint64_t dispatch_threshold(double eps,
                                 std::optional<std::uint64_t> override_value,
                                 bool* capped) {
  if (capped) *capped = false;
  if (override_value) return *override_value;
  double t = 12.0 / eps;
  double raw = std::pow(t, t);
  if (!(raw <= 1e6)) {
    if (capped) *capped = true;
    return 1000000;
  }
  return static_cast<std::uint64_t>(std::ceil(raw));
}

namespace {

MechanismPtr solve_r_block(const AuctionInstance& sub, const BuildOptions& opts,
                           nlohmann::json& block_meta,
                           std::vector<std::string>& warnings) {
  AuctionInstance block = sub;
  bool coarsened = false;
  if (!block.all_finite_support()) {
    coarsened = true;
    // Continuous marginals reduce to the discrete solvers through the
    // geometric coarsening; the result is the eps-variant of the concept.
    std::vector<std::vector<ValueDistribution>> cols(block.items());
    for (int j = 0; j < block.items(); ++j) {
      auto col = block.column(j);
      double beta = anchoring_point(col, splitmix64(block.seed() + j));
      auto [lo, hi] = truncation_interval(beta, block.epsilon());
      for (int i = 0; i < block.bidders(); ++i)
        cols[j].push_back(coarsen(block.marginal(i, j), block.epsilon(), lo, hi));
    }
    block = AuctionInstance::general(block.bidders(), std::move(cols),
                                     block.epsilon(), block.delta(), block.seed());
    warnings.push_back(
        "R block has continuous marginals; coarsened onto the (1+eps) grid, "
        "guarantees weaken to the eps-variants");
  }

  if (opts.concept_kind == SolutionConcept::DT ||
      opts.concept_kind == SolutionConcept::EpsDT) {
    EpsDtResult res =
        eps_dt_search(block, block.epsilon(), opts.enumeration_cap);
    block_meta["solver"] = "eps_dt_search";
    block_meta["objective"] = res.objective;
    return res.mechanism;
  }

  SolutionConcept lp_concept =
      (opts.concept_kind == SolutionConcept::IC ||
       opts.concept_kind == SolutionConcept::EpsIC)
          ? SolutionConcept::IC
          : SolutionConcept::BIC;
  LPModel model = build_lp(block, lp_concept, opts.lp_variable_cap);
  LPSolution sol = solve_lp(model);
  block_meta["solver"] = "lp";
  block_meta["lpObjective"] = sol.objective;
  block_meta["lpVariables"] = model.num_variables;
  // bids round onto the coarse grid, so the realized guarantee drops to the
  // eps-variant whenever coarsening happened
  std::optional<SolutionConcept> realized;
  if (coarsened)
    realized = lp_concept == SolutionConcept::IC ? SolutionConcept::EpsIC
                                                 : SolutionConcept::EpsBIC;
  return lp_mechanism(model, sol, realized);
}

}  // namespace

BuiltMechanism build_ptas_mechanism(const AuctionInstance& instance,
                                    const BuildOptions& opts) {
  // The revenue guarantees need tame tails: every marginal must either pass
  // the MHR check or have a bounded support ratio.
  const int rows_to_check = instance.population_mode() ? 1 : instance.bidders();
  for (int j = 0; j < instance.items(); ++j) {
    for (int i = 0; i < rows_to_check; ++i) {
      const auto& d = instance.marginal(i, j);
      if (!check_mhr(d).is_mhr && !std::isfinite(support_ratio(d)))
        throw std::invalid_argument(
            "marginal (bidder " + std::to_string(i) + ", item " +
            std::to_string(j) +
            ") is neither MHR nor bounded-ratio; no guarantee applies");
    }
  }

  BuiltMechanism built;
  nlohmann::json meta;
  meta["epsilon"] = instance.epsilon();
  meta["delta"] = instance.delta();
  meta["concept"] = to_string(opts.concept_kind);

  // Population dispatch: with enough i.i.d. bidders, per-item reserves are
  // already near-optimal.
  bool capped = false;
  std::uint64_t threshold = dispatch_threshold(
      instance.epsilon(), opts.dispatch_threshold_override, &capped);
  if (capped)
    built.warnings.push_back(
        "dispatch threshold (12/eps)^(12/eps) overflows desk scale; capped at 1e6");
  meta["dispatchThreshold"] = threshold;

  if (instance.population_mode() &&
      static_cast<std::uint64_t>(instance.bidders()) >= threshold) {
    std::vector<double> reserves(instance.items());
    nlohmann::json per_item = nlohmann::json::array();
    for (int j = 0; j < instance.items(); ++j) {
      IidReserve r =
          iid_reserve(instance.marginal(0, j), instance.bidders(),
                      instance.epsilon(), splitmix64(instance.seed() + j));
      reserves[j] = r.reserve;
      per_item.push_back({{"reserve", r.reserve}, {"guarantee", r.guarantee}});
    }
    built.mechanism = second_price_reserve(std::move(reserves));
    meta["route"] = "population_reserve";
    meta["perItem"] = per_item;
    meta["mechanism"] = built.mechanism->to_json();
    built.metadata = std::move(meta);
    return built;
  }

  // Few-bidder route: truncate, partition, solve R exactly, sell S by
  // reserve welfare, ignore T.
  meta["route"] = "partition";
  RangeRatioResult rr = range_ratio(instance, instance.epsilon(), instance.seed());
  std::vector<double> maxes =
      expected_maxes(instance, opts.estimate_samples, instance.seed());
  Partition part =
      partition_items(maxes, rr.c, instance.epsilon(), instance.delta());
  meta["partition"] = part.to_json();

  MechanismPtr m1;
  if (part.R.empty()) {
    m1 = null_mechanism(0);
  } else {
    nlohmann::json block_meta;
    m1 = solve_r_block(instance.restrict_items(part.R), opts, block_meta,
                       built.warnings);
    meta["rBlock"] = block_meta;
  }

  MechanismPtr m2;
  double s_hat = 0.0;
  if (part.S.empty()) {
    m2 = null_mechanism(0);
  } else {
    double s_value = 0.0;
    for (int j : part.S) s_value += maxes[j];
    s_hat = (1.0 - instance.epsilon()) * s_value;
    m2 = reserve_welfare(s_hat);
    meta["sBlock"] = {{"sHat", s_hat}, {"expectedWelfare", s_value}};
  }

  built.mechanism = combine(std::move(m1), part.R, std::move(m2), part.S,
                            part.T, instance.items());
  meta["mechanism"] = built.mechanism->to_json();
  built.metadata = std::move(meta);
  return built;
}

}  // namespace auctionforge
