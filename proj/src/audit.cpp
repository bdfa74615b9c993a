#include "auctionforge/audit.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace auctionforge {

namespace {

template <class Fn>
void map_replicates(int n, Fn&& fn) {
  const int workers = worker_count();
#pragma omp parallel for schedule(static) num_threads(workers)
  for (int r = 0; r < n; ++r) fn(r);
}

template <class Fn>
void map_replicates_serial(int n, Fn&& fn) {
  for (int r = 0; r < n; ++r) fn(r);
}

double bidder_utility(const BidProfile& values, const Outcome& out, int bidder) {
  double u = -out.payments[bidder];
  for (int j = 0; j < values.items; ++j)
    u += values.at(bidder, j) * out.alloc[bidder * values.items + j];
  return u;
}

double optimal_welfare(const BidProfile& values) {
  double w = 0.0;
  for (int j = 0; j < values.items; ++j) {
    double best = 0.0;
    for (int i = 0; i < values.bidders; ++i)
      best = std::max(best, values.at(i, j));
    w += best;
  }
  return w;
}

// Reduction in replicate order keeps reports bit-identical across thread
// counts.
RevenueEstimate reduce_estimate(std::vector<double> revenue,
                                std::vector<double> welfare) {
  RevenueEstimate est;
  const int n = static_cast<int>(revenue.size());
  double rsum = 0.0, wsum = 0.0;
  for (int r = 0; r < n; ++r) {
    rsum += revenue[r];
    wsum += welfare[r];
  }
  est.revenueMean = rsum / n;
  est.welfareMean = wsum / n;
  double var = 0.0;
  for (int r = 0; r < n; ++r) {
    double d = revenue[r] - est.revenueMean;
    var += d * d;
  }
  var = n > 1 ? var / (n - 1) : 0.0;
  est.revenueCI95 = 1.96 * std::sqrt(var / n);
  est.revenueSamples = std::move(revenue);
  est.welfareSamples = std::move(welfare);
  return est;
}

template <class Mapper>
RevenueEstimate estimate_impl(const Mechanism& mech,
                              const AuctionInstance& instance, int samples,
                              std::uint64_t seed, Mapper&& mapper) {
  if (samples < 100) throw std::invalid_argument("estimate needs samples >= 100");
  std::vector<double> revenue(samples), welfare(samples);
  mapper(samples, [&](int r) {
    RandomStream rng = RandomStream::substream(seed, r);
    BidProfile profile = sample_truthful_profile(instance, rng);
    Outcome out = mech.run(profile, r);
    revenue[r] = out.revenue();
    welfare[r] = optimal_welfare(profile);
  });
  return reduce_estimate(std::move(revenue), std::move(welfare));
}

}  // namespace

RevenueEstimate estimate(const Mechanism& mech, const AuctionInstance& instance,
                         int samples, std::uint64_t seed) {
  return estimate_impl(mech, instance, samples, seed,
                       [](int n, auto&& fn) { map_replicates(n, fn); });
}

RevenueEstimate estimate_serial(const Mechanism& mech,
                                const AuctionInstance& instance, int samples,
                                std::uint64_t seed) {
  return estimate_impl(mech, instance, samples, seed,
                       [](int n, auto&& fn) { map_replicates_serial(n, fn); });
}

IrAudit check_ir(const Mechanism& mech, const AuctionInstance& instance,
                 int samples, std::uint64_t seed) {
  std::vector<std::int64_t> violations(samples, 0);
  std::vector<double> worst(samples, 0.0);
  map_replicates(samples, [&](int r) {
    RandomStream rng = RandomStream::substream(seed, r);
    BidProfile profile = sample_truthful_profile(instance, rng);
    Outcome out = mech.run(profile, r);
    for (int i = 0; i < profile.bidders; ++i) {
      double u = bidder_utility(profile, out, i);
      if (u < -1e-9) ++violations[r];
      worst[r] = std::min(worst[r], u);
    }
  });
  IrAudit audit;
  for (int r = 0; r < samples; ++r) {
    audit.violations += violations[r];
    audit.worstMargin = std::min(audit.worstMargin, worst[r]);
  }
  return audit;
}

nlohmann::json DeviationGrid::to_json() const {
  return {{"factors", factors},
          {"perCoordinateZero", per_coordinate_zero},
          {"wholeVector", whole_vector},
          {"extraValues", extra_values}};
}

namespace {

// All unilateral reports to try for one bidder, derived from her current row.
std::vector<std::vector<double>> deviated_rows(const std::vector<double>& row,
                                               const DeviationGrid& grid) {
  std::vector<std::vector<double>> rows;
  const std::size_t n = row.size();
  for (double f : grid.factors) {
    for (std::size_t j = 0; j < n; ++j) {
      auto r = row;
      r[j] *= f;
      rows.push_back(std::move(r));
    }
  }
  if (grid.per_coordinate_zero) {
    for (std::size_t j = 0; j < n; ++j) {
      auto r = row;
      r[j] = 0.0;
      rows.push_back(std::move(r));
    }
  }
  if (grid.whole_vector) {
    for (double f : grid.factors) {
      auto r = row;
      for (double& x : r) x *= f;
      rows.push_back(std::move(r));
    }
    rows.emplace_back(n, 0.0);
  }
  for (double v : grid.extra_values) {
    for (std::size_t j = 0; j < n; ++j) {
      auto r = row;
      r[j] = v;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::string grid_spec_string(const DeviationGrid& grid) {
  return grid.to_json().dump();
}

double regret_dt_ic(const Mechanism& mech, const AuctionInstance& instance,
                    const DeviationGrid& grid, int samples,
                    std::uint64_t seed) {
  std::vector<double> worst(samples, 0.0);
  map_replicates(samples, [&](int r) {
    RandomStream rng = RandomStream::substream(seed, r);
    BidProfile profile = sample_truthful_profile(instance, rng);
    Outcome truthful = mech.run(profile, r);
    for (int i = 0; i < profile.bidders; ++i) {
      double u_truth = bidder_utility(profile, truthful, i);
      std::vector<double> row(profile.items);
      for (int j = 0; j < profile.items; ++j) row[j] = profile.at(i, j);
      for (const auto& dev : deviated_rows(row, grid)) {
        BidProfile lie = profile;
        for (int j = 0; j < profile.items; ++j) lie.at(i, j) = dev[j];
        Outcome out = mech.run(lie, r);
        double u_dev = bidder_utility(profile, out, i);
        worst[r] = std::max(worst[r], u_dev - u_truth);
      }
    }
  });
  double regret = 0.0;
  for (double w : worst) regret = std::max(regret, w);
  return regret;
}

// Opponent value matrices with probabilities, enumerated exactly when every
// marginal has finite support and the product stays small. Exact enumeration
// removes the Monte Carlo noise that would otherwise dominate binding BIC
// constraints.
struct OpponentSet {
  std::vector<BidProfile> profiles;  // bidder i's row left zero
  std::vector<double> weights;
};

bool enumerate_opponents(const AuctionInstance& instance, int bidder,
                         OpponentSet& out, std::uint64_t cap) {
  if (!instance.all_finite_support()) return false;
  const int m = instance.bidders();
  const int n = instance.items();
  double count = 1.0;
  for (int i = 0; i < m; ++i) {
    if (i == bidder) continue;
    for (int j = 0; j < n; ++j)
      count *= static_cast<double>(instance.marginal(i, j).support().size());
    if (count > static_cast<double>(cap)) return false;
  }
  std::vector<std::pair<int, int>> cells;  // (bidder, item) free cells
  for (int i = 0; i < m; ++i)
    if (i != bidder)
      for (int j = 0; j < n; ++j) cells.emplace_back(i, j);

  std::vector<std::size_t> digits(cells.size(), 0);
  bool done = cells.empty();
  BidProfile profile(m, n);
  if (done) {
    out.profiles.push_back(profile);
    out.weights.push_back(1.0);
    return true;
  }
  while (true) {
    double w = 1.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& d = instance.marginal(cells[c].first, cells[c].second);
      profile.at(cells[c].first, cells[c].second) = d.support()[digits[c]];
      w *= d.probs()[digits[c]];
    }
    out.profiles.push_back(profile);
    out.weights.push_back(w);
    std::size_t pos = cells.size();
    while (pos-- > 0) {
      const auto& d = instance.marginal(cells[pos].first, cells[pos].second);
      if (++digits[pos] < d.support().size()) break;
      digits[pos] = 0;
      if (pos == 0) return true;
    }
  }
}

double regret_bic(const Mechanism& mech, const AuctionInstance& instance,
                  const DeviationGrid& grid, int samples, std::uint64_t seed,
                  int opponent_draws) {
  const int m = instance.bidders();
  const int n = instance.items();
  opponent_draws = std::max(opponent_draws, 1);

  // (bidder, type) pairs: the full own-type support when finite and small,
  // sampled from the prior otherwise.
  struct Pair {
    int bidder;
    std::vector<double> type;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < m; ++i) {
    double type_count = 1.0;
    if (instance.all_finite_support())
      for (int j = 0; j < n; ++j)
        type_count *= static_cast<double>(instance.marginal(i, j).support().size());
    if (instance.all_finite_support() && type_count <= 512.0) {
      std::vector<std::vector<double>> types = {{}};
      for (int j = 0; j < n; ++j) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : types)
          for (double v : instance.marginal(i, j).support()) {
            auto t = prefix;
            t.push_back(v);
            next.push_back(std::move(t));
          }
        types = std::move(next);
      }
      for (auto& t : types) pairs.push_back({i, std::move(t)});
    } else {
      RandomStream rng = RandomStream::substream(splitmix64(seed) ^ 0x5b1c, i);
      int budget = std::min(std::max(1, samples / std::max(1, m)), 64);
      for (int t = 0; t < budget; ++t) {
        Pair p;
        p.bidder = i;
        p.type.resize(n);
        for (int j = 0; j < n; ++j) p.type[j] = instance.marginal(i, j).sample(rng);
        pairs.push_back(std::move(p));
      }
    }
  }

  // Exact opponent enumeration per bidder where feasible.
  std::vector<OpponentSet> exact(m);
  std::vector<char> have_exact(m, 0);
  for (int i = 0; i < m; ++i)
    have_exact[i] = enumerate_opponents(instance, i, exact[i], 65536) ? 1 : 0;

  std::vector<double> worst(pairs.size(), 0.0);
  map_replicates(static_cast<int>(pairs.size()), [&](int idx) {
    const Pair& pair = pairs[idx];
    const int i = pair.bidder;
    auto reports = deviated_rows(pair.type, grid);
    reports.insert(reports.begin(), pair.type);  // truthful first

    std::vector<double> mean_utility(reports.size(), 0.0);
    double weight_total = 0.0;

    auto accumulate = [&](const BidProfile& opponents, double w,
                          std::uint64_t draw) {
      weight_total += w;
      for (std::size_t d = 0; d < reports.size(); ++d) {
        BidProfile bids = opponents;
        for (int j = 0; j < n; ++j) bids.at(i, j) = reports[d][j];
        Outcome out = mech.run(bids, draw);
        double u = -out.payments[i];
        for (int j = 0; j < n; ++j) u += pair.type[j] * out.alloc[i * n + j];
        mean_utility[d] += w * u;
      }
    };

    if (have_exact[i]) {
      const OpponentSet& ops = exact[i];
      for (std::size_t k = 0; k < ops.profiles.size(); ++k)
        accumulate(ops.profiles[k], ops.weights[k], k);
    } else {
      // Common random numbers: the same opponent draws and mechanism coins
      // across every report.
      for (int k = 0; k < opponent_draws; ++k) {
        RandomStream rng = RandomStream::substream(splitmix64(seed + idx), k);
        BidProfile profile(m, n);
        for (int ii = 0; ii < m; ++ii)
          for (int j = 0; j < n; ++j)
            profile.at(ii, j) = instance.marginal(ii, j).sample(rng);
        accumulate(profile, 1.0, static_cast<std::uint64_t>(k));
      }
    }

    for (std::size_t d = 1; d < reports.size(); ++d)
      worst[idx] = std::max(
          worst[idx], (mean_utility[d] - mean_utility[0]) / weight_total);
  });

  double regret = 0.0;
  for (double w : worst) regret = std::max(regret, w);
  return regret;
}

}  // namespace

RegretAudit estimate_regret(const Mechanism& mech,
                            const AuctionInstance& instance,
                            SolutionConcept concept_kind,
                            const DeviationGrid& grid, int samples,
                            std::uint64_t seed, int opponent_draws) {
  RegretAudit audit;
  audit.gridSpec = grid_spec_string(grid);
  if (concept_kind == SolutionConcept::BIC ||
      concept_kind == SolutionConcept::EpsBIC) {
    audit.maxObserved =
        regret_bic(mech, instance, grid, samples, seed, opponent_draws);
  } else {
    audit.maxObserved = regret_dt_ic(mech, instance, grid, samples, seed);
  }
  return audit;
}

ConcentrationResult check_concentration(std::span<const double> samples,
                                        double eps, double delta,
                                        double slack) {
  if (samples.size() < 1000)
    throw std::invalid_argument("check_concentration needs >= 1000 samples");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  std::size_t inside = 0;
  for (double s : samples)
    if (s > (1.0 - eps) * mean && s < (1.0 + eps) * mean) ++inside;
  ConcentrationResult res;
  res.eps = eps;
  res.delta = delta;
  res.empiricalFraction =
      static_cast<double>(inside) / static_cast<double>(samples.size());
  res.passed = res.empiricalFraction >= 1.0 - delta - slack;
  return res;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json AuditReport::to_json() const {
  return {{"mechanism", mechanismName},
          {"solutionConcept", solutionConcept},
          {"revenueMean", revenueMean},
          {"revenueCI95", revenueCI95},
          {"welfareMean", welfareMean},
          {"revenueToWelfare", revenueToWelfare},
          {"irViolations", irViolations},
          {"irWorstMargin", irWorstMargin},
          {"regret",
           {{"maxObserved", regretMaxObserved},
            {"deviationGridSpec", regretGridSpec}}},
          {"concentration",
           {{"eps", epsilon},
            {"delta", delta},
            {"passed", concentrationPassed},
            {"empiricalFraction", concentrationFraction}}},
          {"samples", samples},
          {"seed", seed},
          {"alarm", alarm}};
}

std::string AuditReport::csv_header() {
  return "mechanism,solutionConcept,revenueMean,revenueCI95,welfareMean,"
         "revenueToWelfare,irViolations,irWorstMargin,regretMaxObserved,"
         "concentrationPassed,concentrationFraction,epsilon,delta,samples,"
         "seed,alarm";
}

std::string AuditReport::csv_row() const {
  std::string out;
  out += mechanismName + "," + solutionConcept + ",";
  out += fmt(revenueMean) + "," + fmt(revenueCI95) + "," + fmt(welfareMean) + ",";
  out += fmt(revenueToWelfare) + "," + std::to_string(irViolations) + ",";
  out += fmt(irWorstMargin) + "," + fmt(regretMaxObserved) + ",";
  out += std::string(concentrationPassed ? "1" : "0") + "," +
         fmt(concentrationFraction) + ",";
  out += fmt(epsilon) + "," + fmt(delta) + "," + std::to_string(samples) + ",";
  out += std::to_string(seed) + "," + (alarm ? "1" : "0");
  return out;
}

AuditReport run_audit(const Mechanism& mech, const AuctionInstance& instance,
                      const AuditOptions& opts) {
  AuditReport report;
  report.mechanismName = mech.name();
  report.solutionConcept = to_string(mech.solution_concept());
  report.samples = opts.samples;
  report.seed = opts.seed;
  report.epsilon = instance.epsilon();
  report.delta = instance.delta();

  RevenueEstimate est = estimate(mech, instance, opts.samples, opts.seed);
  report.revenueMean = est.revenueMean;
  report.revenueCI95 = est.revenueCI95;
  report.welfareMean = est.welfareMean;
  report.revenueToWelfare =
      est.welfareMean > 0.0 ? est.revenueMean / est.welfareMean : 0.0;

  IrAudit ir = check_ir(mech, instance, opts.samples, opts.seed);
  report.irViolations = ir.violations;
  report.irWorstMargin = ir.worstMargin;

  RegretAudit regret =
      estimate_regret(mech, instance, mech.solution_concept(), opts.deviations,
                      opts.samples, opts.seed, opts.opponent_draws);
  report.regretMaxObserved = regret.maxObserved;
  report.regretGridSpec = regret.gridSpec;

  if (est.welfareSamples.size() >= 1000) {
    ConcentrationResult conc =
        check_concentration(est.welfareSamples, instance.epsilon(),
                            instance.delta(), opts.concentration_slack);
    report.concentrationPassed = conc.passed;
    report.concentrationFraction = conc.empiricalFraction;
  }

  // Exact concepts alarm above 1e-6: closed-form rules sit at <= 1e-9, while
  // LP-backed tables inherit the solver's 1e-7 feasibility tolerance.
  const double eps_claim =
      mech.solution_concept() == SolutionConcept::DT ||
              mech.solution_concept() == SolutionConcept::IC ||
              mech.solution_concept() == SolutionConcept::BIC
          ? 1e-6
          : instance.epsilon();
  report.alarm = (mech.claims_ir() && ir.violations > 0) ||
                 (mech.claims_truthful() && regret.maxObserved > eps_claim);
  return report;
}

}  // namespace auctionforge
