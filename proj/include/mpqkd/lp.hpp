// Small dense linear programs over box-bounded variables.
//
// Embedded two-phase primal simplex with Bland's anti-cycling rule.  Problem
// sizes here are tiny (tens of variables and rows), so a dense tableau is
// both fast enough and bit-reproducible; upper bounds are handled as
// explicit constraint rows.

#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace mpqkd::lp {

enum class Sense { le, ge, eq };

struct Row {
    std::vector<double> a;
    Sense sense = Sense::le;
    double b = 0.0;
};

struct Problem {
    std::size_t n = 0;          // variables, all constrained to x >= 0
    std::vector<double> c;      // objective, size n
    bool maximize = true;
    std::vector<Row> rows;
    std::vector<double> upper;  // per-variable upper bound; +inf disables

    // n variables with box [0, 1] and an empty constraint set.
    static Problem boxed(std::size_t n_vars);
};

enum class Status { optimal, infeasible };

struct Solution {
    Status status = Status::infeasible;
    double value = 0.0;
    std::vector<double> x;
    // Phase-1 residual (sum of artificial variables) when infeasible; the
    // amount by which the constraints cannot be met.
    double infeasibility = 0.0;
};

// Optimal within ~1e-9 absolute for well-scaled inputs.  Throws
// std::runtime_error if the problem is unbounded (impossible once every
// variable has a finite upper bound) or if the iteration cap is hit.
Solution solve(const Problem& p);

} // namespace mpqkd::lp
