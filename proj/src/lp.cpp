#include "auctionforge/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace auctionforge {

DiscreteTypeSpace DiscreteTypeSpace::from_instance(
    const AuctionInstance& instance) {
  if (!instance.all_finite_support())
    throw std::invalid_argument(
        "discrete type space needs finite-support marginals");
  DiscreteTypeSpace sp;
  sp.bidders = instance.bidders();
  sp.items = instance.items();
  sp.supports.resize(sp.bidders);
  sp.probs.resize(sp.bidders);
  sp.types_per_bidder.assign(sp.bidders, 1);
  sp.profiles = 1;
  for (int i = 0; i < sp.bidders; ++i) {
    sp.supports[i].resize(sp.items);
    sp.probs[i].resize(sp.items);
    for (int j = 0; j < sp.items; ++j) {
      const auto& d = instance.marginal(i, j);
      sp.supports[i][j] = d.support();
      sp.probs[i][j] = d.probs();
      sp.types_per_bidder[i] *= d.support().size();
    }
    sp.profiles *= sp.types_per_bidder[i];
  }
  return sp;
}

std::vector<double> DiscreteTypeSpace::profile_values(std::uint64_t p) const {
  std::vector<double> v(static_cast<std::size_t>(bidders) * items);
  // Digits are stored bidder-major, item-minor; peel from the least
  // significant end.
  for (int i = bidders - 1; i >= 0; --i) {
    for (int j = items - 1; j >= 0; --j) {
      std::uint64_t radix = supports[i][j].size();
      v[i * items + j] = supports[i][j][p % radix];
      p /= radix;
    }
  }
  return v;
}

double DiscreteTypeSpace::profile_prob(std::uint64_t p) const {
  double pr = 1.0;
  for (int i = bidders - 1; i >= 0; --i) {
    for (int j = items - 1; j >= 0; --j) {
      std::uint64_t radix = supports[i][j].size();
      pr *= probs[i][j][p % radix];
      p /= radix;
    }
  }
  return pr;
}

std::uint64_t DiscreteTypeSpace::type_of(std::uint64_t p, int bidder) const {
  // Trailing radix product strictly after `bidder`.
  std::uint64_t below = 1;
  for (int i = bidders - 1; i > bidder; --i) below *= types_per_bidder[i];
  return (p / below) % types_per_bidder[bidder];
}

std::uint64_t DiscreteTypeSpace::with_bidder_type(
    std::uint64_t p, int bidder, std::uint64_t type_index) const {
  std::uint64_t below = 1;
  for (int i = bidders - 1; i > bidder; --i) below *= types_per_bidder[i];
  std::uint64_t old = (p / below) % types_per_bidder[bidder];
  return p + (type_index - old) * below;
}

double DiscreteTypeSpace::type_prob(int bidder, std::uint64_t type_index) const {
  double pr = 1.0;
  for (int j = items - 1; j >= 0; --j) {
    std::uint64_t radix = supports[bidder][j].size();
    pr *= probs[bidder][j][type_index % radix];
    type_index /= radix;
  }
  return pr;
}

std::vector<double> DiscreteTypeSpace::type_values(
    int bidder, std::uint64_t type_index) const {
  std::vector<double> v(items);
  for (int j = items - 1; j >= 0; --j) {
    std::uint64_t radix = supports[bidder][j].size();
    v[j] = supports[bidder][j][type_index % radix];
    type_index /= radix;
  }
  return v;
}

std::uint64_t LPModel::x_col(std::uint64_t p, int i, int j) const {
  return p * space.bidders * space.items + static_cast<std::uint64_t>(i) * space.items + j;
}

std::uint64_t LPModel::pplus_col(std::uint64_t p, int i) const {
  return static_cast<std::uint64_t>(space.profiles) * space.bidders * space.items +
         p * space.bidders + i;
}

std::uint64_t LPModel::pminus_col(std::uint64_t p, int i) const {
  return pplus_col(p, i) +
         static_cast<std::uint64_t>(space.profiles) * space.bidders;
}

namespace {

// u_i(report r at true profile p) contribution: sum_j v_ij x(r)_ij - p(r)_i,
// added into `row` with the given sign.
void add_utility_terms(const LPModel& model, std::vector<double>& row,
                       std::uint64_t true_profile, std::uint64_t report_profile,
                       int bidder, double sign, double weight = 1.0) {
  const auto values = model.space.profile_values(true_profile);
  for (int j = 0; j < model.space.items; ++j)
    row[model.x_col(report_profile, bidder, j)] +=
        sign * weight * values[bidder * model.space.items + j];
  row[model.pplus_col(report_profile, bidder)] -= sign * weight;
  row[model.pminus_col(report_profile, bidder)] += sign * weight;
}

}  // namespace

LPModel build_lp(const AuctionInstance& instance, SolutionConcept concept_kind,
                 std::uint64_t variable_cap) {
  if (concept_kind != SolutionConcept::IC && concept_kind != SolutionConcept::BIC)
    throw std::invalid_argument("build_lp supports the IC and BIC concepts");

  LPModel model;
  model.concept_kind = concept_kind;
  model.space = DiscreteTypeSpace::from_instance(instance);
  const auto& sp = model.space;
  const std::uint64_t mn = static_cast<std::uint64_t>(sp.bidders) * sp.items;

  model.num_variables = sp.profiles * (mn + sp.bidders);
  if (model.num_variables > variable_cap)
    throw InstanceTooLargeError("LP variable count exceeds the cap",
                                model.num_variables, variable_cap);

  const std::uint64_t ncols = sp.profiles * (mn + 2ULL * sp.bidders);
  model.lp.num_vars = static_cast<int>(ncols);
  model.lp.objective.assign(ncols, 0.0);
  for (std::uint64_t p = 0; p < sp.profiles; ++p) {
    double pr = sp.profile_prob(p);
    for (int i = 0; i < sp.bidders; ++i) {
      model.lp.objective[model.pplus_col(p, i)] = pr;
      model.lp.objective[model.pminus_col(p, i)] = -pr;
    }
  }

  // Supply: sum_i x(v)_ij <= 1.
  for (std::uint64_t p = 0; p < sp.profiles; ++p) {
    for (int j = 0; j < sp.items; ++j) {
      LinearProgram::Row row;
      row.coeffs.assign(ncols, 0.0);
      for (int i = 0; i < sp.bidders; ++i) row.coeffs[model.x_col(p, i, j)] = 1.0;
      row.rel = '<';
      row.rhs = 1.0;
      model.lp.rows.push_back(std::move(row));
      ++model.supply_rows;
    }
  }

  // IR: u_i(v) >= 0 per profile.
  for (std::uint64_t p = 0; p < sp.profiles; ++p) {
    for (int i = 0; i < sp.bidders; ++i) {
      LinearProgram::Row row;
      row.coeffs.assign(ncols, 0.0);
      add_utility_terms(model, row.coeffs, p, p, i, +1.0);
      row.rel = '>';
      row.rhs = 0.0;
      model.lp.rows.push_back(std::move(row));
      ++model.ir_rows;
    }
  }

  if (concept_kind == SolutionConcept::IC) {
    // u_i(v) >= u_i(v'_i, v_-i) for every profile and alternative type.
    for (int i = 0; i < sp.bidders; ++i) {
      for (std::uint64_t p = 0; p < sp.profiles; ++p) {
        std::uint64_t own = sp.type_of(p, i);
        for (std::uint64_t t = 0; t < sp.types_per_bidder[i]; ++t) {
          if (t == own) continue;
          LinearProgram::Row row;
          row.coeffs.assign(ncols, 0.0);
          add_utility_terms(model, row.coeffs, p, p, i, +1.0);
          add_utility_terms(model, row.coeffs, p, sp.with_bidder_type(p, i, t),
                            i, -1.0);
          row.rel = '>';
          row.rhs = 0.0;
          model.lp.rows.push_back(std::move(row));
          ++model.ic_rows;
        }
      }
    }
  } else {
    // BIC: rows per (bidder, type, alternative type), averaged over opponents.
    for (int i = 0; i < sp.bidders; ++i) {
      for (std::uint64_t t = 0; t < sp.types_per_bidder[i]; ++t) {
        double tp = sp.type_prob(i, t);
        if (tp <= 0.0) continue;
        for (std::uint64_t t2 = 0; t2 < sp.types_per_bidder[i]; ++t2) {
          if (t2 == t) continue;
          LinearProgram::Row row;
          row.coeffs.assign(ncols, 0.0);
          // Enumerate opponent profiles by fixing bidder i's type to t and
          // walking all profiles that agree with it.
          for (std::uint64_t p = 0; p < sp.profiles; ++p) {
            if (sp.type_of(p, i) != t) continue;
            double w = sp.profile_prob(p) / tp;  // Pr[v_-i]
            add_utility_terms(model, row.coeffs, p, p, i, +1.0, w);
            add_utility_terms(model, row.coeffs, p,
                              sp.with_bidder_type(p, i, t2), i, -1.0, w);
          }
          row.rel = '>';
          row.rhs = 0.0;
          model.lp.rows.push_back(std::move(row));
          ++model.ic_rows;
        }
      }
    }
  }

  return model;
}

LPSolution solve_lp(const LPModel& model) {
  SimplexResult res = solve_simplex(model.lp);
  if (res.status != SimplexResult::Status::Optimal)
    throw std::logic_error(
        "auction LP came back infeasible or unbounded; the builder is broken");

  const auto& sp = model.space;
  LPSolution sol;
  sol.objective = res.objective;
  sol.alloc.assign(sp.profiles * sp.bidders * sp.items, 0.0);
  sol.payments.assign(sp.profiles * sp.bidders, 0.0);
  for (std::uint64_t p = 0; p < sp.profiles; ++p) {
    for (int i = 0; i < sp.bidders; ++i) {
      for (int j = 0; j < sp.items; ++j) {
        double x = res.solution[model.x_col(p, i, j)];
        sol.alloc[p * sp.bidders * sp.items + i * sp.items + j] =
            std::clamp(x, 0.0, 1.0);
      }
      sol.payments[p * sp.bidders + i] =
          res.solution[model.pplus_col(p, i)] -
          res.solution[model.pminus_col(p, i)];
    }
  }
  verify_lp_solution(model, sol);
  return sol;
}

void verify_lp_solution(const LPModel& model, const LPSolution& sol,
                        double tol) {
  const auto& sp = model.space;
  std::vector<double> full(model.lp.num_vars, 0.0);
  for (std::uint64_t p = 0; p < sp.profiles; ++p) {
    for (int i = 0; i < sp.bidders; ++i) {
      for (int j = 0; j < sp.items; ++j)
        full[model.x_col(p, i, j)] =
            sol.alloc[p * sp.bidders * sp.items + i * sp.items + j];
      double pay = sol.payments[p * sp.bidders + i];
      full[model.pplus_col(p, i)] = pay > 0.0 ? pay : 0.0;
      full[model.pminus_col(p, i)] = pay < 0.0 ? -pay : 0.0;
    }
  }
  for (std::size_t r = 0; r < model.lp.rows.size(); ++r) {
    const auto& row = model.lp.rows[r];
    double lhs = 0.0;
    for (int j = 0; j < model.lp.num_vars; ++j) lhs += row.coeffs[j] * full[j];
    bool ok = row.rel == '<'   ? lhs <= row.rhs + tol
              : row.rel == '>' ? lhs >= row.rhs - tol
                               : std::abs(lhs - row.rhs) <= tol;
    if (!ok)
      throw std::logic_error("LP solution violates row " + std::to_string(r));
  }
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string export_lp_text(const LPModel& model) {
  const auto& sp = model.space;
  std::string out;
  out += "# auctionforge LP (";
  out += to_string(model.concept_kind);
  out += "), profiles=" + std::to_string(sp.profiles) +
         " variables=" + std::to_string(model.num_variables) + "\n";
  auto xname = [&](std::uint64_t p, int i, int j) {
    return "x[" + std::to_string(p) + "," + std::to_string(i) + "," +
           std::to_string(j) + "]";
  };
  auto pname = [&](std::uint64_t p, int i) {
    return "p[" + std::to_string(p) + "," + std::to_string(i) + "]";
  };

  out += "maximize:";
  for (std::uint64_t p = 0; p < sp.profiles; ++p)
    for (int i = 0; i < sp.bidders; ++i)
      out += " + " + fmt_double(sp.profile_prob(p)) + " " + pname(p, i);
  out += "\n";

  std::size_t r = 0;
  auto emit_row = [&](const std::string& label) {
    const auto& row = model.lp.rows[r++];
    out += label + ":";
    for (std::uint64_t p = 0; p < sp.profiles; ++p) {
      for (int i = 0; i < sp.bidders; ++i) {
        for (int j = 0; j < sp.items; ++j) {
          double cx = row.coeffs[model.x_col(p, i, j)];
          if (cx != 0.0) out += " + " + fmt_double(cx) + " " + xname(p, i, j);
        }
        double cp = row.coeffs[model.pplus_col(p, i)];
        if (cp != 0.0) out += " + " + fmt_double(cp) + " " + pname(p, i);
      }
    }
    out += row.rel == '<' ? " <= " : row.rel == '>' ? " >= " : " = ";
    out += fmt_double(row.rhs) + "\n";
  };

  for (std::uint64_t p = 0; p < sp.profiles; ++p)
    for (int j = 0; j < sp.items; ++j)
      emit_row("supply[" + std::to_string(p) + "," + std::to_string(j) + "]");
  for (std::uint64_t p = 0; p < sp.profiles; ++p)
    for (int i = 0; i < sp.bidders; ++i)
      emit_row("ir[" + std::to_string(p) + "," + std::to_string(i) + "]");
  std::size_t ic = 0;
  while (r < model.lp.rows.size())
    emit_row((model.concept_kind == SolutionConcept::IC ? "ic[" : "bic[") +
             std::to_string(ic++) + "]");
  out += "# x in [0,1] via supply rows; p free\n";
  return out;
}

MechanismPtr lp_mechanism(const LPModel& model, const LPSolution& sol,
                          std::optional<SolutionConcept> realized) {
  const auto& sp = model.space;
  std::vector<Outcome> outcomes;
  outcomes.reserve(sp.profiles);
  for (std::uint64_t p = 0; p < sp.profiles; ++p) {
    Outcome out(sp.bidders, sp.items);
    for (int i = 0; i < sp.bidders; ++i) {
      for (int j = 0; j < sp.items; ++j)
        out.alloc[i * sp.items + j] =
            sol.alloc[p * sp.bidders * sp.items + i * sp.items + j];
      out.payments[i] = sol.payments[p * sp.bidders + i];
    }
    outcomes.push_back(std::move(out));
  }
  nlohmann::json meta = {{"lpObjective", sol.objective}};
  return table_mechanism(std::string("lp_") + to_string(model.concept_kind),
                         realized.value_or(model.concept_kind), sp.supports,
                         std::move(outcomes), std::move(meta));
}

namespace {

ValueDistribution coarsen_to_multiples(const ValueDistribution& dist,
                                       double eps) {
  std::map<double, double> mass;
  const auto& sup = dist.support();
  const auto& probs = dist.probs();
  for (std::size_t i = 0; i < sup.size(); ++i)
    mass[std::floor(sup[i] / eps + 1e-9) * eps] += probs[i];
  std::vector<double> support, p;
  for (const auto& [v, q] : mass) {
    support.push_back(v);
    p.push_back(q);
  }
  if (support.size() == 1) return ValueDistribution::point_mass(support[0]);
  return ValueDistribution::discrete(std::move(support), std::move(p));
}

}  // namespace

EpsDtResult eps_dt_search(const AuctionInstance& instance, double eps,
                          std::uint64_t enumeration_cap) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!instance.all_finite_support())
    throw std::invalid_argument("eps_dt_search needs finite-support marginals");

  // Coarsen every marginal down to multiples of eps.
  std::vector<std::vector<ValueDistribution>> columns(instance.items());
  for (int j = 0; j < instance.items(); ++j) {
    for (int i = 0; i < instance.bidders(); ++i)
      columns[j].push_back(coarsen_to_multiples(instance.marginal(i, j), eps));
  }
  AuctionInstance coarse = AuctionInstance::general(
      instance.bidders(), std::move(columns), instance.epsilon(),
      instance.delta(), instance.seed());

  DiscreteTypeSpace sp = DiscreteTypeSpace::from_instance(coarse);
  const int m = sp.bidders, n = sp.items;

  // (m+1)^n allocation choices per profile; tables are the profile-indexed
  // product.
  double options_per_profile = std::pow(m + 1.0, n);
  double table_count = std::pow(options_per_profile, static_cast<double>(sp.profiles));
  if (!(table_count <= static_cast<double>(enumeration_cap)))
    throw InstanceTooLargeError(
        "eps-DT allocation table space exceeds the cap",
        table_count > 1e18 ? ~0ULL : static_cast<std::uint64_t>(table_count),
        enumeration_cap);

  const std::uint64_t opts = static_cast<std::uint64_t>(options_per_profile);
  const std::uint64_t tables = static_cast<std::uint64_t>(table_count);

  // Payment LP for a fixed allocation table: maximize expected revenue
  // subject to the IC and IR rows with x constant.
  const std::uint64_t pcols = sp.profiles * m * 2ULL;
  auto pplus = [&](std::uint64_t p, int i) { return p * m + i; };
  auto pminus = [&](std::uint64_t p, int i) { return sp.profiles * m + p * m + i; };

  auto alloc_of = [&](std::uint64_t table, std::uint64_t profile, int item) {
    // digit `profile` of the table in base opts, then digit `item` in base m+1;
    // value m means "unallocated"
    std::uint64_t digit = table;
    for (std::uint64_t q = 0; q < profile; ++q) digit /= opts;
    digit %= opts;
    for (int jj = 0; jj < item; ++jj) digit /= (m + 1);
    return static_cast<int>(digit % (m + 1));
  };

  EpsDtResult best;
  best.eps = eps;
  best.objective = -1.0;

  std::vector<std::vector<double>> values(sp.profiles);
  std::vector<double> prprob(sp.profiles);
  for (std::uint64_t p = 0; p < sp.profiles; ++p) {
    values[p] = sp.profile_values(p);
    prprob[p] = sp.profile_prob(p);
  }

  for (std::uint64_t table = 0; table < tables; ++table) {
    LinearProgram lp;
    lp.num_vars = static_cast<int>(pcols);
    lp.objective.assign(pcols, 0.0);
    for (std::uint64_t p = 0; p < sp.profiles; ++p)
      for (int i = 0; i < m; ++i) {
        lp.objective[pplus(p, i)] = prprob[p];
        lp.objective[pminus(p, i)] = -prprob[p];
      }

    auto allocated_value = [&](std::uint64_t truth, std::uint64_t report, int i) {
      double v = 0.0;
      for (int j = 0; j < n; ++j)
        if (alloc_of(table, report, j) == i) v += values[truth][i * n + j];
      return v;
    };

    for (std::uint64_t p = 0; p < sp.profiles; ++p) {
      for (int i = 0; i < m; ++i) {
        {  // IR: p_i(v) <= value_i(v)
          LinearProgram::Row row;
          row.coeffs.assign(pcols, 0.0);
          row.coeffs[pplus(p, i)] = 1.0;
          row.coeffs[pminus(p, i)] = -1.0;
          row.rel = '<';
          row.rhs = allocated_value(p, p, i);
          lp.rows.push_back(std::move(row));
        }
        std::uint64_t own = sp.type_of(p, i);
        for (std::uint64_t t = 0; t < sp.types_per_bidder[i]; ++t) {
          if (t == own) continue;
          std::uint64_t dev = sp.with_bidder_type(p, i, t);
          // value(p,p) - p(p) >= value(p,dev) - p(dev)
          LinearProgram::Row row;
          row.coeffs.assign(pcols, 0.0);
          row.coeffs[pplus(p, i)] = -1.0;
          row.coeffs[pminus(p, i)] = 1.0;
          row.coeffs[pplus(dev, i)] += 1.0;
          row.coeffs[pminus(dev, i)] -= 1.0;
          row.rel = '>';
          row.rhs = allocated_value(p, dev, i) - allocated_value(p, p, i);
          lp.rows.push_back(std::move(row));
        }
      }
    }

    SimplexResult res = solve_simplex(lp);
    if (res.status != SimplexResult::Status::Optimal) continue;  // infeasible table
    if (res.objective > best.objective + 1e-12) {
      std::vector<Outcome> outcomes;
      outcomes.reserve(sp.profiles);
      for (std::uint64_t p = 0; p < sp.profiles; ++p) {
        Outcome out(m, n);
        for (int j = 0; j < n; ++j) {
          int w = alloc_of(table, p, j);
          if (w < m) out.alloc[w * n + j] = 1.0;
        }
        for (int i = 0; i < m; ++i)
          out.payments[i] = res.solution[pplus(p, i)] - res.solution[pminus(p, i)];
        outcomes.push_back(std::move(out));
      }
      best.objective = res.objective;
      best.mechanism = table_mechanism(
          "eps_dt", SolutionConcept::EpsDT, sp.supports, std::move(outcomes),
          {{"objective", res.objective}, {"eps", eps}});
    }
  }

  if (!best.mechanism)
    throw std::logic_error("eps_dt_search found no feasible table");
  return best;
}

}  // namespace auctionforge
