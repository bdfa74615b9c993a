#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "auctionforge/distribution.hpp"

namespace auctionforge {

// An m x n matrix of independent value marginals, plus the accuracy knobs the
// pipeline runs with. In population mode every bidder shares the per-item
// marginal F_j; in general mode each (bidder, item) cell has its own F_ij.
class AuctionInstance {
 public:
  static AuctionInstance population(int bidders,
                                    std::vector<ValueDistribution> items,
                                    double epsilon, double delta,
                                    std::uint64_t seed);
  static AuctionInstance general(
      int bidders, std::vector<std::vector<ValueDistribution>> columns,
      double epsilon, double delta, std::uint64_t seed);

  int bidders() const { return bidders_; }
  int items() const { return static_cast<int>(columns_.size()); }
  bool population_mode() const { return population_; }

  const ValueDistribution& marginal(int bidder, int item) const {
    return population_ ? columns_[item][0] : columns_[item][bidder];
  }

  // All m marginals of one item column (population mode: m copies of F_j).
  std::vector<ValueDistribution> column(int item) const;

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  std::uint64_t seed() const { return seed_; }

  bool all_finite_support() const;

  // Sub-instance keeping only the given item columns, in the given order.
  AuctionInstance restrict_items(const std::vector<int>& items) const;

  nlohmann::json to_json() const;
  static AuctionInstance from_json(const nlohmann::json& j);

 private:
  AuctionInstance() = default;

  int bidders_ = 0;
  bool population_ = false;
  // columns_[j] has one entry in population mode, bidders_ entries otherwise
  std::vector<std::vector<ValueDistribution>> columns_;
  double epsilon_ = 0.1;
  double delta_ = 0.05;
  std::uint64_t seed_ = 0;
};

}  // namespace auctionforge
