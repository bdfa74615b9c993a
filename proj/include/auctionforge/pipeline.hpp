#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "auctionforge/lp.hpp"
#include "auctionforge/mechanism.hpp"
#include "auctionforge/partition.hpp"

namespace auctionforge {

struct BuildOptions {
  SolutionConcept concept_kind = SolutionConcept::BIC;
  std::optional<std::uint64_t> dispatch_threshold_override;
  int estimate_samples = 100000;
  std::uint64_t lp_variable_cap = kDefaultLpVariableCap;
  std::uint64_t enumeration_cap = 1000000;
};

struct BuiltMechanism {
  MechanismPtr mechanism;
  nlohmann::json metadata;  // replayable: mechanism + build summary
  std::vector<std::string> warnings;
};

// Population threshold (12/eps)^(12/eps), capped at 1e6 with a warning (the
// uncapped value is astronomical for small eps). An explicit override wins.
std::uint64_t dispatch_threshold(double eps,
                                 std::optional<std::uint64_t> override_value,
                                 bool* capped = nullptr);

// The full construction: population instances with enough bidders get the
// per-item second-price-with-reserve auction; everything else is truncated,
// partitioned into (R, S, T), the R block solved exactly (LP for IC/BIC, the
// coarsened table search for DT), the S block sold by reserve-welfare at
// (1-eps) of its expected optimal welfare, and T ignored.
BuiltMechanism build_ptas_mechanism(const AuctionInstance& instance,
                                    const BuildOptions& opts = {});

}  // namespace auctionforge
