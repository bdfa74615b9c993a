#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "auctionforge/mechanism.hpp"

namespace auctionforge {

// The audit kernels run replicate r on RandomStream::substream(seed, r) and
// write into slot r of a preallocated buffer, so the parallel (OpenMP) and
// serial paths produce bit-identical results for any thread count. The serial
// path is kept as the reference implementation; tests and the benchmark
// target compare the two.

struct RevenueEstimate {
  double revenueMean = 0.0;
  double revenueCI95 = 0.0;
  double welfareMean = 0.0;  // E[sum_j max_i v_ij], the optimal-welfare yardstick
  std::vector<double> revenueSamples;
  std::vector<double> welfareSamples;
};

RevenueEstimate estimate(const Mechanism& mech, const AuctionInstance& instance,
                         int samples, std::uint64_t seed);
RevenueEstimate estimate_serial(const Mechanism& mech,
                                const AuctionInstance& instance, int samples,
                                std::uint64_t seed);

struct IrAudit {
  std::int64_t violations = 0;
  double worstMargin = 0.0;  // most negative truthful utility observed
};

// Truthful utilities v_i . x_i - p_i tallied per sampled outcome; entries
// below -1e-9 count as violations.
IrAudit check_ir(const Mechanism& mech, const AuctionInstance& instance,
                 int samples, std::uint64_t seed);

// Unilateral deviations tried against each sampled profile: per-coordinate
// multiplicative factors, per-coordinate zero, the same applied to the whole
// vector, and any extra absolute values (e.g. a coarsening grid).
struct DeviationGrid {
  std::vector<double> factors = {0.95, 1.05};
  bool per_coordinate_zero = true;
  bool whole_vector = true;
  std::vector<double> extra_values;

  nlohmann::json to_json() const;
};

struct RegretAudit {
  double maxObserved = 0.0;
  std::string gridSpec;
};

// DT/IC: max utility gain over (profile, bidder, deviation) triples with the
// opponents' bids held fixed. BIC: per (bidder, type) the gain in expected
// utility over opponent resampling, with common random numbers across the
// deviations; `opponent_draws` profiles per pair.
RegretAudit estimate_regret(const Mechanism& mech,
                            const AuctionInstance& instance,
                            SolutionConcept concept_kind,
                            const DeviationGrid& grid, int samples,
                            std::uint64_t seed, int opponent_draws = 1000);

struct ConcentrationResult {
  bool passed = false;
  double empiricalFraction = 0.0;
  double eps = 0.0;
  double delta = 0.0;
};

// Fraction of samples inside (1 +- eps) of the sample mean; passes when the
// fraction reaches 1 - delta - slack (slack absorbs binomial noise).
ConcentrationResult check_concentration(std::span<const double> samples,
                                        double eps, double delta,
                                        double slack = 0.02);

struct AuditOptions {
  int samples = 10000;
  std::uint64_t seed = 1;
  DeviationGrid deviations;
  int opponent_draws = 1000;
  double concentration_slack = 0.02;
};

struct AuditReport {
  std::string mechanismName;
  std::string solutionConcept;
  double revenueMean = 0.0;
  double revenueCI95 = 0.0;
  double welfareMean = 0.0;
  double revenueToWelfare = 0.0;
  std::int64_t irViolations = 0;
  double irWorstMargin = 0.0;
  double regretMaxObserved = 0.0;
  std::string regretGridSpec;
  bool concentrationPassed = false;
  double concentrationFraction = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  // set when the mechanism's claimed guarantees fail the audit
  bool alarm = false;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

// Full audit: revenue/welfare estimate, IR check, regret estimate against the
// mechanism's declared solution concept, and the concentration test of the
// welfare samples at the instance's (eps, delta).
AuditReport run_audit(const Mechanism& mech, const AuctionInstance& instance,
                      const AuditOptions& opts);

}  // namespace auctionforge
