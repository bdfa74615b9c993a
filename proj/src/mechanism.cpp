#include "auctionforge/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace auctionforge {

std::string to_string(SolutionConcept c) {
  switch (c) {
    case SolutionConcept::DT: return "dt";
    case SolutionConcept::IC: return "ic";
    case SolutionConcept::BIC: return "bic";
    case SolutionConcept::EpsDT: return "eps-dt";
    case SolutionConcept::EpsIC: return "eps-ic";
    case SolutionConcept::EpsBIC: return "eps-bic";
  }
  return "dt";
}

SolutionConcept solution_concept_from_string(const std::string& s) {
  if (s == "dt") return SolutionConcept::DT;
  if (s == "ic") return SolutionConcept::IC;
  if (s == "bic") return SolutionConcept::BIC;
  if (s == "eps-dt") return SolutionConcept::EpsDT;
  if (s == "eps-ic") return SolutionConcept::EpsIC;
  if (s == "eps-bic") return SolutionConcept::EpsBIC;
  throw std::invalid_argument("unknown solution concept \"" + s + "\"");
}

BidProfile sample_truthful_profile(const AuctionInstance& instance,
                                   RandomStream& rng) {
  BidProfile profile(instance.bidders(), instance.items());
  for (int i = 0; i < instance.bidders(); ++i)
    for (int j = 0; j < instance.items(); ++j)
      profile.at(i, j) = instance.marginal(i, j).sample(rng);
  return profile;
}

namespace {

void check_profile(const BidProfile& bids) {
  if (bids.bidders < 1 || bids.items < 1 ||
      bids.bids.size() != static_cast<std::size_t>(bids.bidders) * bids.items)
    throw std::invalid_argument("malformed bid profile");
  for (double b : bids.bids)
    if (!(b >= 0.0) || !std::isfinite(b))
      throw std::invalid_argument("bids must be finite and nonnegative");
}

int argmax_bidder(const BidProfile& bids, int item) {
  int best = 0;
  for (int i = 1; i < bids.bidders; ++i)
    if (bids.at(i, item) > bids.at(best, item)) best = i;
  return best;  // ties stay with the lowest index
}

class GrandBundleMechanism final : public Mechanism {
 public:
  explicit GrandBundleMechanism(double reserve)
      : Mechanism("grand_bundle", SolutionConcept::DT, true, true),
        reserve_(reserve) {
    if (reserve < 0.0) throw std::invalid_argument("reserve must be >= 0");
  }

  nlohmann::json to_json() const override {
    return {{"type", "grand_bundle"}, {"reserve", reserve_}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t) const override {
    check_profile(bids);
    if (bids.bidders != 1)
      throw std::invalid_argument("grand_bundle serves a single bidder");
    Outcome out(1, bids.items);
    double total = 0.0;
    for (int j = 0; j < bids.items; ++j) total += bids.at(0, j);
    if (total >= reserve_) {
      for (int j = 0; j < bids.items; ++j) out.alloc[j] = 1.0;
      out.payments[0] = reserve_;
    }
    return out;
  }

 private:
  double reserve_;
};

class ReserveWelfareMechanism final : public Mechanism {
 public:
  explicit ReserveWelfareMechanism(double s_hat)
      : Mechanism("reserve_welfare", SolutionConcept::DT, true, true),
        s_hat_(s_hat) {
    if (s_hat < 0.0) throw std::invalid_argument("reserve welfare must be >= 0");
  }

  nlohmann::json to_json() const override {
    return {{"type", "reserve_welfare"}, {"sHat", s_hat_}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t) const override {
    check_profile(bids);
    Outcome out(bids.bidders, bids.items);
    double welfare = 0.0;
    for (int j = 0; j < bids.items; ++j)
      welfare += bids.at(argmax_bidder(bids, j), j);
    if (welfare < s_hat_) return out;  // below the reserve: sell nothing

    std::vector<double> winnings(bids.bidders, 0.0);
    for (int j = 0; j < bids.items; ++j) {
      int w = argmax_bidder(bids, j);
      out.alloc[w * bids.items + j] = 1.0;
      winnings[w] += bids.at(w, j);
    }
    for (int i = 0; i < bids.bidders; ++i)
      out.payments[i] = s_hat_ - (welfare - winnings[i]);
    return out;
  }

 private:
  double s_hat_;
};

class SecondPriceReserveMechanism final : public Mechanism {
 public:
  explicit SecondPriceReserveMechanism(std::vector<double> reserves)
      : Mechanism("second_price_reserve", SolutionConcept::DT, true, true),
        reserves_(std::move(reserves)) {
    for (double r : reserves_)
      if (r < 0.0) throw std::invalid_argument("reserves must be >= 0");
  }

  nlohmann::json to_json() const override {
    return {{"type", "second_price_reserve"}, {"reserves", reserves_}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t) const override {
    check_profile(bids);
    if (bids.items != static_cast<int>(reserves_.size()))
      throw std::invalid_argument("reserve vector length must match items");
    Outcome out(bids.bidders, bids.items);
    for (int j = 0; j < bids.items; ++j) {
      int w = argmax_bidder(bids, j);
      if (bids.at(w, j) < reserves_[j]) continue;
      double second = 0.0;
      for (int i = 0; i < bids.bidders; ++i)
        if (i != w) second = std::max(second, bids.at(i, j));
      out.alloc[w * bids.items + j] = 1.0;
      out.payments[w] += std::max(reserves_[j], second);
    }
    return out;
  }

 private:
  std::vector<double> reserves_;
};

class NullMechanism final : public Mechanism {
 public:
  explicit NullMechanism(int items)
      : Mechanism("null", SolutionConcept::DT, true, true), items_(items) {}

  nlohmann::json to_json() const override {
    return {{"type", "null"}, {"items", items_}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t) const override {
    check_profile(bids);
    return Outcome(bids.bidders, bids.items);
  }

 private:
  int items_;
};

SolutionConcept weakest_concept(SolutionConcept a, SolutionConcept b) {
  auto rank = [](SolutionConcept c) {
    switch (c) {
      case SolutionConcept::DT: return 0;
      case SolutionConcept::IC: return 1;
      case SolutionConcept::BIC: return 2;
      case SolutionConcept::EpsDT: return 3;
      case SolutionConcept::EpsIC: return 4;
      case SolutionConcept::EpsBIC: return 5;
    }
    return 5;
  };
  return rank(a) >= rank(b) ? a : b;
}

class CombinedMechanism final : public Mechanism {
 public:
  CombinedMechanism(MechanismPtr m1, std::vector<int> s1, MechanismPtr m2,
                    std::vector<int> s2, std::vector<int> s3, int items)
      : Mechanism("combined",
                  weakest_concept(m1->solution_concept(), m2->solution_concept()),
                  m1->claims_ir() && m2->claims_ir(),
                  m1->claims_truthful() && m2->claims_truthful()),
        m1_(std::move(m1)),
        m2_(std::move(m2)),
        s1_(std::move(s1)),
        s2_(std::move(s2)),
        s3_(std::move(s3)),
        items_(items) {
    std::set<int> seen;
    for (const auto* block : {&s1_, &s2_, &s3_})
      for (int j : *block)
        if (j < 0 || j >= items_ || !seen.insert(j).second)
          throw std::invalid_argument(
              "combine: index sets must disjointly cover the items");
    if (static_cast<int>(seen.size()) != items_)
      throw std::invalid_argument(
          "combine: index sets must disjointly cover the items");
  }

  nlohmann::json to_json() const override {
    return {{"type", "combined"}, {"items", items_},
            {"s1", s1_},          {"s2", s2_},
            {"s3", s3_},          {"m1", m1_->to_json()},
            {"m2", m2_->to_json()}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t draw) const override {
    check_profile(bids);
    if (bids.items != items_)
      throw std::invalid_argument("profile has the wrong number of items");
    Outcome out(bids.bidders, bids.items);
    merge(out, bids, *m1_, s1_, draw);
    merge(out, bids, *m2_, s2_, draw);
    return out;
  }

 private:
  void merge(Outcome& out, const BidProfile& bids, const Mechanism& sub,
             const std::vector<int>& block, std::uint64_t draw) const {
    if (block.empty()) return;
    BidProfile proj(bids.bidders, static_cast<int>(block.size()));
    for (int i = 0; i < bids.bidders; ++i)
      for (std::size_t jj = 0; jj < block.size(); ++jj)
        proj.at(i, static_cast<int>(jj)) = bids.at(i, block[jj]);
    Outcome sub_out = sub.run(proj, draw);
    for (int i = 0; i < bids.bidders; ++i) {
      for (std::size_t jj = 0; jj < block.size(); ++jj)
        out.alloc[i * items_ + block[jj]] =
            sub_out.alloc[i * block.size() + jj];
      out.payments[i] += sub_out.payments[i];
    }
  }

  MechanismPtr m1_, m2_;
  std::vector<int> s1_, s2_, s3_;
  int items_;
};

class SubsetRestrictedMechanism final : public Mechanism {
 public:
  SubsetRestrictedMechanism(MechanismPtr base, std::vector<int> subset,
                            AuctionInstance priors, std::uint64_t seed)
      : Mechanism("subset_restricted", base->solution_concept(),
                  base->claims_ir(), base->claims_truthful()),
        base_(std::move(base)),
        subset_(std::move(subset)),
        priors_(std::move(priors)),
        seed_(seed) {
    std::set<int> seen;
    for (int j : subset_)
      if (j < 0 || j >= priors_.items() || !seen.insert(j).second)
        throw std::invalid_argument("subset indices must be distinct items");
    in_subset_.assign(priors_.items(), false);
    for (int j : subset_) in_subset_[j] = true;
  }

  // The sampled out-of-subset completion for a given draw index; recomputable
  // at will, which is what makes audits replayable.
  std::vector<double> sampled_completion(std::uint64_t draw) const {
    RandomStream rng = RandomStream::substream(seed_, draw);
    std::vector<double> values(
        static_cast<std::size_t>(priors_.bidders()) * priors_.items(), 0.0);
    for (int i = 0; i < priors_.bidders(); ++i)
      for (int j = 0; j < priors_.items(); ++j)
        if (!in_subset_[j])
          values[i * priors_.items() + j] = priors_.marginal(i, j).sample(rng);
    return values;
  }

  nlohmann::json to_json() const override {
    return {{"type", "subset_restricted"},
            {"subset", subset_},
            {"seed", seed_},
            {"priors", priors_.to_json()},
            {"base", base_->to_json()}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t draw) const override {
    check_profile(bids);
    if (bids.items != static_cast<int>(subset_.size()))
      throw std::invalid_argument(
          "profile must carry one bid per subset item");
    const int n = priors_.items();
    std::vector<double> completion = sampled_completion(draw);

    BidProfile full(bids.bidders, n);
    full.bids = completion;
    for (int i = 0; i < bids.bidders; ++i)
      for (std::size_t jj = 0; jj < subset_.size(); ++jj)
        full.at(i, subset_[jj]) = bids.at(i, static_cast<int>(jj));

    Outcome base_out = base_->run(full, draw);

    Outcome out(bids.bidders, static_cast<int>(subset_.size()));
    for (int i = 0; i < bids.bidders; ++i) {
      double rebate = 0.0;
      for (int j = 0; j < n; ++j)
        if (!in_subset_[j])
          rebate += base_out.alloc[i * n + j] * completion[i * n + j];
      for (std::size_t jj = 0; jj < subset_.size(); ++jj)
        out.alloc[i * subset_.size() + jj] = base_out.alloc[i * n + subset_[jj]];
      out.payments[i] = base_out.payments[i] - rebate;
    }
    return out;
  }

 private:
  MechanismPtr base_;
  std::vector<int> subset_;
  AuctionInstance priors_;
  std::uint64_t seed_;
  std::vector<char> in_subset_;
};

class TableMechanism final : public Mechanism {
 public:
  TableMechanism(std::string name, SolutionConcept sc,
                 std::vector<std::vector<std::vector<double>>> supports,
                 std::vector<Outcome> outcomes, nlohmann::json meta)
      : Mechanism(std::move(name), sc, true,
                  sc == SolutionConcept::DT || sc == SolutionConcept::IC ||
                      sc == SolutionConcept::BIC),
        supports_(std::move(supports)),
        outcomes_(std::move(outcomes)),
        meta_(std::move(meta)) {
    std::size_t profiles = 1;
    bidders_ = static_cast<int>(supports_.size());
    items_ = bidders_ > 0 ? static_cast<int>(supports_[0].size()) : 0;
    for (const auto& row : supports_)
      for (const auto& cell : row) {
        if (cell.empty())
          throw std::invalid_argument("table support cell may not be empty");
        profiles *= cell.size();
      }
    if (profiles != outcomes_.size())
      throw std::invalid_argument("outcome table size must match the profile count");
  }

  nlohmann::json to_json() const override {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& out : outcomes_)
      rows.push_back({{"alloc", out.alloc}, {"payments", out.payments}});
    return {{"type", "table"},
            {"name", name()},
            {"concept", to_string(solution_concept())},
            {"supports", supports_},
            {"outcomes", rows},
            {"meta", meta_}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t) const override {
    check_profile(bids);
    if (bids.bidders != bidders_ || bids.items != items_)
      throw std::invalid_argument("profile shape does not match the table");
    // Mixed-radix profile index, bidder-major then item, digits ordered as in
    // the support lists. Bids round down to the nearest support value.
    std::size_t idx = 0;
    for (int i = 0; i < bidders_; ++i) {
      for (int j = 0; j < items_; ++j) {
        const auto& cell = supports_[i][j];
        auto it = std::upper_bound(cell.begin(), cell.end(),
                                   bids.at(i, j) + 1e-12);
        std::size_t digit =
            it == cell.begin()
                ? 0
                : static_cast<std::size_t>(it - cell.begin()) - 1;
        idx = idx * cell.size() + digit;
      }
    }
    return outcomes_[idx];
  }

 private:
  std::vector<std::vector<std::vector<double>>> supports_;
  std::vector<Outcome> outcomes_;
  nlohmann::json meta_;
  int bidders_ = 0;
  int items_ = 0;
};

// Pay-your-bid on every item; advertises DT but underbidding strictly helps.
class BrokenFirstPriceMechanism final : public Mechanism {
 public:
  explicit BrokenFirstPriceMechanism(int items)
      : Mechanism("broken_first_price", SolutionConcept::DT, true, true),
        items_(items) {}

  nlohmann::json to_json() const override {
    return {{"type", "broken_first_price"}, {"items", items_}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t) const override {
    check_profile(bids);
    Outcome out(bids.bidders, bids.items);
    for (int j = 0; j < bids.items; ++j) {
      int w = argmax_bidder(bids, j);
      if (bids.at(w, j) <= 0.0) continue;
      out.alloc[w * bids.items + j] = 1.0;
      out.payments[w] += bids.at(w, j);
    }
    return out;
  }

 private:
  int items_;
};

// Charges a flat fee regardless of allocation; advertises IR but violates it
// on any profile where a bidder wins nothing.
class BrokenOverchargerMechanism final : public Mechanism {
 public:
  explicit BrokenOverchargerMechanism(int items)
      : Mechanism("broken_overcharger", SolutionConcept::DT, true, true),
        items_(items) {}

  nlohmann::json to_json() const override {
    return {{"type", "broken_overcharger"}, {"items", items_}};
  }

 protected:
  Outcome execute(const BidProfile& bids, std::uint64_t) const override {
    check_profile(bids);
    Outcome out(bids.bidders, bids.items);
    for (int j = 0; j < bids.items; ++j) {
      int w = argmax_bidder(bids, j);
      if (bids.at(w, j) > 0.0) out.alloc[w * bids.items + j] = 1.0;
    }
    for (int i = 0; i < bids.bidders; ++i) out.payments[i] = 1.0;
    return out;
  }

 private:
  int items_;
};

}  // namespace

MechanismPtr grand_bundle(double reserve) {
  return std::make_shared<GrandBundleMechanism>(reserve);
}

MechanismPtr reserve_welfare(double sHat) {
  return std::make_shared<ReserveWelfareMechanism>(sHat);
}

MechanismPtr second_price_reserve(std::vector<double> reserves) {
  return std::make_shared<SecondPriceReserveMechanism>(std::move(reserves));
}

MechanismPtr combine(MechanismPtr m1, std::vector<int> s1, MechanismPtr m2,
                     std::vector<int> s2, std::vector<int> s3, int items) {
  return std::make_shared<CombinedMechanism>(std::move(m1), std::move(s1),
                                             std::move(m2), std::move(s2),
                                             std::move(s3), items);
}

MechanismPtr restrict_to_subset(MechanismPtr base, std::vector<int> subset,
                                AuctionInstance priors, std::uint64_t seed) {
  return std::make_shared<SubsetRestrictedMechanism>(
      std::move(base), std::move(subset), std::move(priors), seed);
}

MechanismPtr null_mechanism(int items) {
  return std::make_shared<NullMechanism>(items);
}

MechanismPtr table_mechanism(
    std::string name, SolutionConcept sc,
    std::vector<std::vector<std::vector<double>>> supports,
    std::vector<Outcome> outcomes, nlohmann::json extra_metadata) {
  return std::make_shared<TableMechanism>(std::move(name), sc,
                                          std::move(supports),
                                          std::move(outcomes),
                                          std::move(extra_metadata));
}

MechanismPtr broken_first_price(int items) {
  return std::make_shared<BrokenFirstPriceMechanism>(items);
}

MechanismPtr broken_overcharger(int items) {
  return std::make_shared<BrokenOverchargerMechanism>(items);
}

MechanismPtr mechanism_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("mechanism metadata needs a \"type\" field");
  const std::string type = j.at("type").get<std::string>();
  if (type == "grand_bundle") return grand_bundle(j.at("reserve").get<double>());
  if (type == "reserve_welfare") return reserve_welfare(j.at("sHat").get<double>());
  if (type == "second_price_reserve")
    return second_price_reserve(j.at("reserves").get<std::vector<double>>());
  if (type == "null") return null_mechanism(j.at("items").get<int>());
  if (type == "combined")
    return combine(mechanism_from_json(j.at("m1")),
                   j.at("s1").get<std::vector<int>>(),
                   mechanism_from_json(j.at("m2")),
                   j.at("s2").get<std::vector<int>>(),
                   j.at("s3").get<std::vector<int>>(), j.at("items").get<int>());
  if (type == "subset_restricted")
    return restrict_to_subset(mechanism_from_json(j.at("base")),
                              j.at("subset").get<std::vector<int>>(),
                              AuctionInstance::from_json(j.at("priors")),
                              j.at("seed").get<std::uint64_t>());
  if (type == "table") {
    std::vector<Outcome> outcomes;
    for (const auto& row : j.at("outcomes")) {
      Outcome out;
      out.alloc = row.at("alloc").get<std::vector<double>>();
      out.payments = row.at("payments").get<std::vector<double>>();
      outcomes.push_back(std::move(out));
    }
    return table_mechanism(
        j.at("name").get<std::string>(),
        solution_concept_from_string(j.at("concept").get<std::string>()),
        j.at("supports").get<std::vector<std::vector<std::vector<double>>>>(),
        std::move(outcomes), j.value("meta", nlohmann::json::object()));
  }
  if (type == "broken_first_price")
    return broken_first_price(j.at("items").get<int>());
  if (type == "broken_overcharger")
    return broken_overcharger(j.at("items").get<int>());
  throw std::invalid_argument("unknown mechanism type \"" + type + "\"");
}

}  // namespace auctionforge
