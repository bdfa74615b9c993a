#include "auctionforge/instance.hpp"

#include <stdexcept>
#include <string>

namespace auctionforge {

namespace {

void validate_params(int bidders, double epsilon, double delta) {
  if (bidders < 1) throw std::invalid_argument("bidders must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.25))
    throw std::invalid_argument("epsilon must lie in (0, 1/4)");
  if (!(delta > 0.0 && delta < 0.125))
    throw std::invalid_argument("delta must lie in (0, 1/8)");
}

}  // namespace

AuctionInstance AuctionInstance::population(int bidders,
                                            std::vector<ValueDistribution> items,
                                            double epsilon, double delta,
                                            std::uint64_t seed) {
  validate_params(bidders, epsilon, delta);
  if (items.empty()) throw std::invalid_argument("instance needs at least one item");
  AuctionInstance inst;
  inst.bidders_ = bidders;
  inst.population_ = true;
  inst.columns_.reserve(items.size());
  for (auto& d : items) inst.columns_.push_back({std::move(d)});
  inst.epsilon_ = epsilon;
  inst.delta_ = delta;
  inst.seed_ = seed;
  return inst;
}

AuctionInstance AuctionInstance::general(
    int bidders, std::vector<std::vector<ValueDistribution>> columns,
    double epsilon, double delta, std::uint64_t seed) {
  validate_params(bidders, epsilon, delta);
  if (columns.empty()) throw std::invalid_argument("instance needs at least one item");
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (static_cast<int>(columns[j].size()) != bidders)
      throw std::invalid_argument("item " + std::to_string(j) +
                                  " must list one marginal per bidder");
  }
  AuctionInstance inst;
  inst.bidders_ = bidders;
  inst.population_ = false;
  inst.columns_ = std::move(columns);
  inst.epsilon_ = epsilon;
  inst.delta_ = delta;
  inst.seed_ = seed;
  return inst;
}

std::vector<ValueDistribution> AuctionInstance::column(int item) const {
  if (population_)
    return std::vector<ValueDistribution>(bidders_, columns_[item][0]);
  return columns_[item];
}

bool AuctionInstance::all_finite_support() const {
  for (const auto& col : columns_)
    for (const auto& d : col)
      if (!d.has_finite_support()) return false;
  return true;
}

AuctionInstance AuctionInstance::restrict_items(
    const std::vector<int>& items) const {
  if (items.empty())
    throw std::invalid_argument("restriction needs at least one item");
  AuctionInstance inst;
  inst.bidders_ = bidders_;
  inst.population_ = population_;
  inst.columns_.reserve(items.size());
  for (int j : items) {
    if (j < 0 || j >= this->items())
      throw std::invalid_argument("item index out of range");
    inst.columns_.push_back(columns_[j]);
  }
  inst.epsilon_ = epsilon_;
  inst.delta_ = delta_;
  inst.seed_ = seed_;
  return inst;
}

nlohmann::json AuctionInstance::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& col : columns_) {
    if (population_) {
      items.push_back(col[0].to_json());
    } else {
      nlohmann::json cell = nlohmann::json::array();
      for (const auto& d : col) cell.push_back(d.to_json());
      items.push_back(cell);
    }
  }
  return {{"bidders", bidders_}, {"population", population_},
          {"epsilon", epsilon_}, {"delta", delta_},
          {"seed", seed_},       {"items", items}};
}

AuctionInstance AuctionInstance::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("instance must be a JSON object");
  for (const char* field : {"bidders", "items"})
    if (!j.contains(field))
      throw std::invalid_argument(std::string("instance is missing \"") + field + "\"");

  int bidders = 0;
  double epsilon = 0.1, delta = 0.05;
  std::uint64_t seed = 0;
  bool population = j.value("population", false);
  try {
    bidders = j.at("bidders").get<int>();
    if (j.contains("epsilon")) epsilon = j.at("epsilon").get<double>();
    if (j.contains("delta")) delta = j.at("delta").get<double>();
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad instance field: ") + e.what());
  }

  const auto& items = j.at("items");
  if (!items.is_array() || items.empty())
    throw std::invalid_argument("\"items\" must be a nonempty array");

  if (population) {
    std::vector<ValueDistribution> cols;
    cols.reserve(items.size());
    for (const auto& cell : items) cols.push_back(ValueDistribution::from_json(cell));
    return AuctionInstance::population(bidders, std::move(cols), epsilon, delta, seed);
  }

  std::vector<std::vector<ValueDistribution>> cols;
  cols.reserve(items.size());
  for (std::size_t jj = 0; jj < items.size(); ++jj) {
    const auto& cell = items[jj];
    std::vector<ValueDistribution> col;
    if (cell.is_array()) {
      for (const auto& frag : cell) col.push_back(ValueDistribution::from_json(frag));
    } else if (bidders == 1) {
      col.push_back(ValueDistribution::from_json(cell));
    } else {
      throw std::invalid_argument("item " + std::to_string(jj) +
                                  ": general mode needs per-bidder arrays");
    }
    cols.push_back(std::move(col));
  }
  return AuctionInstance::general(bidders, std::move(cols), epsilon, delta, seed);
}

}  // namespace auctionforge
