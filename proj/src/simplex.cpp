#include "auctionforge/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace auctionforge {

namespace {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, double tol) : tol_(tol), n_(lp.num_vars) {
    const int m = static_cast<int>(lp.rows.size());

    // Count slack and artificial columns. Rows are normalized to rhs >= 0
    // first; '<' rows get a slack, '>' rows a surplus plus an artificial,
    // '=' rows an artificial. '>' rows with rhs <= 0 flip to '<' so they ride
    // on a slack alone — the incentive rows all have rhs 0, and this keeps
    // phase 1 away from them.
    std::vector<LinearProgram::Row> rows = lp.rows;
    for (auto& row : rows) {
      if (row.rhs < 0.0 || (row.rhs == 0.0 && row.rel == '>')) {
        for (double& a : row.coeffs) a = -a;
        row.rhs = -row.rhs;
        if (row.rel == '<') row.rel = '>';
        else if (row.rel == '>') row.rel = '<';
      }
    }
    int slacks = 0, artificials = 0;
    for (const auto& row : rows) {
      if (row.rel != '=') ++slacks;
      if (row.rel != '<') ++artificials;
    }
    cols_ = n_ + slacks + artificials;
    art_begin_ = n_ + slacks;

    t_.assign(m, std::vector<double>(cols_ + 1, 0.0));
    basis_.assign(m, -1);

    int slack_at = n_;
    int art_at = art_begin_;
    for (int i = 0; i < m; ++i) {
      const auto& row = rows[i];
      for (int j = 0; j < n_; ++j) t_[i][j] = row.coeffs[j];
      t_[i][cols_] = row.rhs;
      if (row.rel == '<') {
        t_[i][slack_at] = 1.0;
        basis_[i] = slack_at++;
      } else if (row.rel == '>') {
        t_[i][slack_at++] = -1.0;
        t_[i][art_at] = 1.0;
        basis_[i] = art_at++;
      } else {
        t_[i][art_at] = 1.0;
        basis_[i] = art_at++;
      }
    }
  }

  SimplexResult solve(const std::vector<double>& objective) {
    const int m = static_cast<int>(t_.size());

    if (art_begin_ < cols_) {
      // Phase 1: maximize minus the sum of artificials.
      std::vector<double> phase1(cols_, 0.0);
      for (int j = art_begin_; j < cols_; ++j) phase1[j] = -1.0;
      if (!optimize(phase1, /*forbid_artificials=*/false))
        return {SimplexResult::Status::Unbounded, 0.0, {}};  // cannot happen
      double infeas = -objective_value(phase1);
      if (infeas > 1e-7) return {SimplexResult::Status::Infeasible, 0.0, {}};
      purge_artificials();
    }

    std::vector<double> full(cols_, 0.0);
    for (int j = 0; j < n_; ++j) full[j] = objective[j];
    if (!optimize(full, /*forbid_artificials=*/true))
      return {SimplexResult::Status::Unbounded, 0.0, {}};

    SimplexResult res;
    res.status = SimplexResult::Status::Optimal;
    res.solution.assign(n_, 0.0);
    for (int i = 0; i < m; ++i)
      if (basis_[i] >= 0 && basis_[i] < n_) res.solution[basis_[i]] = t_[i][cols_];
    res.objective = 0.0;
    for (int j = 0; j < n_; ++j) res.objective += objective[j] * res.solution[j];
    return res;
  }

 private:
  double objective_value(const std::vector<double>& c) const {
    double v = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i)
      if (basis_[i] >= 0) v += c[basis_[i]] * t_[i][cols_];
    return v;
  }

  // Reduced costs d_j = c_j - c_B . B^{-1} A_j for the current basis.
  std::vector<double> reduced_costs(const std::vector<double>& c) const {
    std::vector<double> d(c.begin(), c.end());
    for (std::size_t i = 0; i < t_.size(); ++i) {
      double cb = basis_[i] >= 0 ? c[basis_[i]] : 0.0;
      if (cb == 0.0) continue;
      for (int j = 0; j < cols_; ++j) d[j] -= cb * t_[i][j];
    }
    return d;
  }

  void pivot(int row, int col) {
    const double inv = 1.0 / t_[row][col];
    for (int j = 0; j <= cols_; ++j) t_[row][j] *= inv;
    t_[row][col] = 1.0;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (static_cast<int>(i) == row) continue;
      double f = t_[i][col];
      if (std::abs(f) < 1e-14) continue;
      for (int j = 0; j <= cols_; ++j) t_[i][j] -= f * t_[row][j];
      t_[i][col] = 0.0;
    }
    basis_[row] = col;
  }

  // Returns false on unboundedness.
  bool optimize(const std::vector<double>& c, bool forbid_artificials) {
    const int m = static_cast<int>(t_.size());
    const long iteration_cap = 20000L + 200L * (m + cols_);
    const long bland_after = 200L + 10L * (m + cols_);

    for (long iter = 0; iter < iteration_cap; ++iter) {
      std::vector<double> d = reduced_costs(c);
      int enter = -1;
      const int jmax = forbid_artificials ? art_begin_ : cols_;
      if (iter < bland_after) {
        double best = tol_;
        for (int j = 0; j < jmax; ++j)
          if (d[j] > best) { best = d[j]; enter = j; }
      } else {
        for (int j = 0; j < jmax; ++j)
          if (d[j] > tol_) { enter = j; break; }  // Bland
      }
      if (enter < 0) return true;  // optimal

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (t_[i][enter] > tol_) {
          double ratio = t_[i][cols_] / t_[i][enter];
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 &&
               (leave < 0 || basis_[i] < basis_[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex failed to converge");
  }

  // After phase 1, rotate leftover artificials out of the basis (or detect
  // redundant rows, which stay harmlessly basic at level zero).
  void purge_artificials() {
    const int m = static_cast<int>(t_.size());
    for (int i = 0; i < m; ++i) {
      if (basis_[i] < art_begin_) continue;
      int col = -1;
      for (int j = 0; j < art_begin_; ++j)
        if (std::abs(t_[i][j]) > tol_) { col = j; break; }
      if (col >= 0) pivot(i, col);
    }
  }

  double tol_;
  int n_;
  int cols_ = 0;
  int art_begin_ = 0;
  std::vector<std::vector<double>> t_;
  std::vector<int> basis_;
};

}  // namespace

SimplexResult solve_simplex(const LinearProgram& lp, double tol) {
  if (lp.num_vars <= 0) throw std::invalid_argument("LP needs variables");
  if (static_cast<int>(lp.objective.size()) != lp.num_vars)
    throw std::invalid_argument("objective length must equal num_vars");
  for (const auto& row : lp.rows) {
    if (static_cast<int>(row.coeffs.size()) != lp.num_vars)
      throw std::invalid_argument("row length must equal num_vars");
    if (row.rel != '<' && row.rel != '>' && row.rel != '=')
      throw std::invalid_argument("row relation must be one of < > =");
  }
  Tableau tableau(lp, tol);
  return tableau.solve(lp.objective);
}

}  // namespace auctionforge
