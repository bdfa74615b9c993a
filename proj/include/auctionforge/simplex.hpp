#pragma once

#include <string>
#include <vector>

namespace auctionforge {

// Dense LP in the form: maximize c.x subject to row constraints and x >= 0.
// Relations are '<' (<=), '>' (>=) and '=' per row.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;

  struct Row {
    std::vector<double> coeffs;  // num_vars entries
    char rel = '<';
    double rhs = 0.0;
  };
  std::vector<Row> rows;
};

struct SimplexResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> solution;
};

// Two-phase dense tableau simplex. Dantzig pricing with a Bland fallback for
// the heavily degenerate programs the auction LPs produce. Sized for the small
// instances this project solves, not for production LP workloads.
SimplexResult solve_simplex(const LinearProgram& lp, double tol = 1e-9);

}  // namespace auctionforge
