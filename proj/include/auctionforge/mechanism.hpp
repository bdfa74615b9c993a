#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "auctionforge/instance.hpp"

namespace auctionforge {

enum class SolutionConcept { DT, IC, BIC, EpsDT, EpsIC, EpsBIC };

std::string to_string(SolutionConcept c);
SolutionConcept solution_concept_from_string(const std::string& s);

// Row-major m x n bid matrix.
struct BidProfile {
  int bidders = 0;
  int items = 0;
  std::vector<double> bids;  // bidders * items entries

  BidProfile() = default;
  BidProfile(int m, int n) : bidders(m), items(n), bids(m * n, 0.0) {}

  double& at(int i, int j) { return bids[i * items + j]; }
  double at(int i, int j) const { return bids[i * items + j]; }
};

BidProfile sample_truthful_profile(const AuctionInstance& instance,
                                   RandomStream& rng);

struct Outcome {
  std::vector<double> alloc;     // m x n, entries in [0,1]
  std::vector<double> payments;  // length m; may be negative for rebates

  Outcome() = default;
  Outcome(int m, int n) : alloc(m * n, 0.0), payments(m, 0.0) {}

  double alloc_at(int i, int j, int items) const { return alloc[i * items + j]; }
  double revenue() const {
    double r = 0.0;
    for (double p : payments) r += p;
    return r;
  }
};

// Executable allocation + payment rule. Immutable and reentrant; randomized
// mechanisms draw their coins from (seed, draw index) so identical indices
// replay identical outcomes. run() without an index advances an internal
// counter; audits pass the replicate index explicitly to stay reproducible
// under any thread count.
class Mechanism {
 public:
  virtual ~Mechanism() = default;

  Outcome run(const BidProfile& bids) const {
    return execute(bids, draw_counter_.fetch_add(1, std::memory_order_relaxed));
  }
  Outcome run(const BidProfile& bids, std::uint64_t draw) const {
    return execute(bids, draw);
  }

  const std::string& name() const { return name_; }
  SolutionConcept solution_concept() const { return concept_; }
  // Claimed guarantees; audits verify them and the CLI alarms on mismatch.
  bool claims_ir() const { return claims_ir_; }
  bool claims_truthful() const { return claims_truthful_; }

  virtual nlohmann::json to_json() const = 0;

 protected:
  Mechanism(std::string name, SolutionConcept sc, bool claims_ir,
            bool claims_truthful)
      : name_(std::move(name)),
        concept_(sc),
        claims_ir_(claims_ir),
        claims_truthful_(claims_truthful) {}

  virtual Outcome execute(const BidProfile& bids, std::uint64_t draw) const = 0;

 private:
  std::string name_;
  SolutionConcept concept_;
  bool claims_ir_;
  bool claims_truthful_;
  mutable std::atomic<std::uint64_t> draw_counter_{0};
};

using MechanismPtr = std::shared_ptr<const Mechanism>;

// Single bidder take-it-or-leave-it offer on all items: if the reported total
// reaches the reserve (equality accepts) the bidder gets everything and pays
// exactly the reserve.
MechanismPtr grand_bundle(double reserve);

// VCG-style rule with a welfare threshold: nothing is sold while reported
// welfare sum_j max_i b_ij stays below sHat; otherwise every item goes to its
// highest bidder (ties to the lowest index) and bidder i pays
// sHat - sum of the other bidders' winning bids. Payments may be negative.
MechanismPtr reserve_welfare(double sHat);

// Independent per-item second-price auction with reserves; the winner pays
// max(reserve, second-highest bid).
MechanismPtr second_price_reserve(std::vector<double> reserves);

// Run m1 on the S1 columns and m2 on the S2 columns, merge allocations and add
// payments; items in S3 are never allocated. The three sets must partition
// [0, n).
MechanismPtr combine(MechanismPtr m1, std::vector<int> s1, MechanismPtr m2,
                     std::vector<int> s2, std::vector<int> s3, int items);

// Subset restriction: sample the out-of-S values from the priors,
// run the base mechanism on the completed profile, keep only the S-columns of
// the allocation and rebate each bidder her sampled value on any out-of-S item
// she won. The completion for draw index d is a pure function of (seed, d).
MechanismPtr restrict_to_subset(MechanismPtr base, std::vector<int> subset,
                                AuctionInstance priors, std::uint64_t seed);

// Allocates nothing, charges nothing.
MechanismPtr null_mechanism(int items);

// Explicit outcome table over the product of per-(bidder,item) supports. Bids
// are rounded down to the nearest support value (below-minimum clamps up to
// the minimum); the outcome is the stored table row. This realizes LP
// solutions and coarsened-search results as executable mechanisms.
MechanismPtr table_mechanism(
    std::string name, SolutionConcept sc,
    std::vector<std::vector<std::vector<double>>> supports,  // [bidder][item]
    std::vector<Outcome> outcomes, nlohmann::json extra_metadata);

// Deliberately broken rules for audit calibration: a pay-your-bid single-item
// auction that falsely advertises DT, and a rule that charges every bidder one
// unit unconditionally while advertising IR.
MechanismPtr broken_first_price(int items);
MechanismPtr broken_overcharger(int items);

// Rebuild a mechanism from its serialized metadata (inverse of to_json()).
MechanismPtr mechanism_from_json(const nlohmann::json& j);

}  // namespace auctionforge
