#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auctionforge/instance.hpp"
#include "auctionforge/mechanism.hpp"
#include "auctionforge/simplex.hpp"

namespace auctionforge {

inline constexpr std::uint64_t kDefaultLpVariableCap = 100000;

// Enumeration of the discrete profile space: per-bidder types are value
// vectors (the product over items of the per-item supports); profiles are
// tuples of types. Index order is bidder-major, then item, then support
// position, matching table_mechanism's lookup.
struct DiscreteTypeSpace {
  int bidders = 0;
  int items = 0;
  std::vector<std::vector<std::vector<double>>> supports;  // [i][j] -> values
  std::vector<std::vector<std::vector<double>>> probs;     // aligned
  std::vector<std::uint64_t> types_per_bidder;
  std::uint64_t profiles = 0;

  static DiscreteTypeSpace from_instance(const AuctionInstance& instance);

  // Value matrix (m x n, row-major) of profile p.
  std::vector<double> profile_values(std::uint64_t p) const;
  double profile_prob(std::uint64_t p) const;
  // Profile obtained from p by replacing bidder i's type block with the one
  // from profile q.
  std::uint64_t with_bidder_type(std::uint64_t p, int bidder,
                                 std::uint64_t type_index) const;
  std::uint64_t type_of(std::uint64_t p, int bidder) const;
  double type_prob(int bidder, std::uint64_t type_index) const;
  std::vector<double> type_values(int bidder, std::uint64_t type_index) const;
};

// The exact revenue-maximization LP over a discrete instance: variables
// x(v)_ij in [0,1] and p(v)_i (free), supply rows per (profile, item), IR rows
// per (profile, bidder) and IC rows per (bidder, profile, alternative type);
// the BIC variant averages each bidder's rows over opponent profiles.
struct LPModel {
  SolutionConcept concept_kind = SolutionConcept::IC;
  DiscreteTypeSpace space;
  std::uint64_t num_variables = 0;  // profiles * (m*n + m)
  std::uint64_t supply_rows = 0;
  std::uint64_t ir_rows = 0;
  std::uint64_t ic_rows = 0;
  LinearProgram lp;  // p variables split into p+ / p- columns internally

  std::uint64_t x_col(std::uint64_t p, int i, int j) const;
  std::uint64_t pplus_col(std::uint64_t p, int i) const;
  std::uint64_t pminus_col(std::uint64_t p, int i) const;
};

LPModel build_lp(const AuctionInstance& instance, SolutionConcept concept_kind,
                 std::uint64_t variable_cap = kDefaultLpVariableCap);

struct LPSolution {
  double objective = 0.0;
  std::vector<double> alloc;     // profiles * m * n
  std::vector<double> payments;  // profiles * m
};

// Optimal solution; throws std::logic_error on infeasible/unbounded models
// (well-formed auction LPs are always feasible and bounded). The returned
// solution is re-verified row by row at tolerance 1e-7.
LPSolution solve_lp(const LPModel& model);

// Row-by-row feasibility recheck; throws std::logic_error on violation.
void verify_lp_solution(const LPModel& model, const LPSolution& sol,
                        double tol = 1e-7);

// Plain-text export (one constraint per line, named variables); byte-stable
// for identical inputs.
std::string export_lp_text(const LPModel& model);

// Wrap an LP solution as an executable mechanism over the instance supports.
// `realized` overrides the advertised concept; the pipeline weakens it to the
// eps-variant when the supports came from coarsening a continuous instance.
MechanismPtr lp_mechanism(const LPModel& model, const LPSolution& sol,
                          std::optional<SolutionConcept> realized = {});

struct EpsDtResult {
  MechanismPtr mechanism;  // eps-DT table mechanism on the coarsened supports
  double objective = 0.0;  // expected revenue on the coarsened instance
  double eps = 0.0;        // regret bound
};

// Brute-force search over deterministic allocation tables on the support
// coarsened to multiples of eps (values round down), with payments chosen by
// an LP per table. The realized mechanism rounds bids down and looks up the
// table, so it is eps-DT on the original values.
EpsDtResult eps_dt_search(const AuctionInstance& instance, double eps,
                          std::uint64_t enumeration_cap = 1000000);

}  // namespace auctionforge
