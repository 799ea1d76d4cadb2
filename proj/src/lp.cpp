#include "mpqkd/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpqkd::lp {

Problem Problem::boxed(std::size_t n_vars) {
    Problem p;
    p.n = n_vars;
    p.c.assign(n_vars, 0.0);
    p.upper.assign(n_vars, 1.0);
    return p;
}

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kFeasEps = 1e-9;
constexpr int kMaxIters = 20000;

struct Tableau {
    std::size_t m = 0, cols = 0;        // rows, columns excluding rhs
    std::vector<std::vector<double>> t; // m x (cols + 1), last column is rhs
    std::vector<double> z;              // reduced-cost row, cols + 1
    std::vector<int> basis;             // basic variable per row
    std::vector<bool> blocked;          // columns barred from entering

    double& rhs(std::size_t i) { return t[i][cols]; }

    void pivot(std::size_t row, std::size_t col) {
        const double piv = t[row][col];
        for (auto& v : t[row]) v /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || t[i][col] == 0.0) continue;
            const double factor = t[i][col];
            for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= factor * t[row][j];
            t[i][col] = 0.0;
        }
        if (z[col] != 0.0) {
            const double factor = z[col];
            for (std::size_t j = 0; j <= cols; ++j) z[j] -= factor * t[row][j];
            z[col] = 0.0;
        }
        basis[row] = static_cast<int>(col);
    }

    // Bland: entering = lowest-index improving column, leaving = min ratio
    // with lowest basis index on ties.  Returns false at optimality.
    bool iterate() {
        std::size_t enter = cols;
        for (std::size_t j = 0; j < cols; ++j) {
            if (!blocked[j] && z[j] < -kPivotEps) { enter = j; break; }
        }
        if (enter == cols) return false;

        std::size_t leave = m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] <= kPivotEps) continue;
            const double ratio = rhs(i) / t[i][enter];
            if (ratio < best - 1e-15 ||
                (ratio < best + 1e-15 && (leave == m || basis[i] < basis[leave]))) {
                best = ratio;
                leave = i;
            }
        }
        if (leave == m) throw std::runtime_error("lp: unbounded problem");
        pivot(leave, enter);
        return true;
    }

    void run() {
        for (int it = 0; it < kMaxIters; ++it)
            if (!iterate()) return;
        throw std::runtime_error("lp: iteration cap exceeded");
    }
};

} // namespace

Solution solve(const Problem& p) {
    if (p.c.size() != p.n || p.upper.size() != p.n)
        throw std::invalid_argument("lp: objective/upper size mismatch");

    // Assemble the working row set: user rows plus upper-bound rows.
    struct WorkRow {
        std::vector<double> a;
        Sense sense;
        double b;
    };
    std::vector<WorkRow> rows;
    rows.reserve(p.rows.size() + p.n);
    for (const auto& r : p.rows) {
        if (r.a.size() != p.n) throw std::invalid_argument("lp: row size mismatch");
        if (!std::isfinite(r.b)) throw std::invalid_argument("lp: non-finite rhs");
        rows.push_back({r.a, r.sense, r.b});
    }
    for (std::size_t j = 0; j < p.n; ++j) {
        if (!std::isfinite(p.upper[j])) continue;
        std::vector<double> a(p.n, 0.0);
        a[j] = 1.0;
        rows.push_back({std::move(a), Sense::le, p.upper[j]});
    }
    // Normalize to b >= 0.
    for (auto& r : rows) {
        if (r.b < 0.0) {
            for (auto& v : r.a) v = -v;
            r.b = -r.b;
            if (r.sense == Sense::le) r.sense = Sense::ge;
            else if (r.sense == Sense::ge) r.sense = Sense::le;
        }
    }

    const std::size_t m = rows.size();
    std::size_t n_slack = 0, n_art = 0;
    for (const auto& r : rows) {
        if (r.sense != Sense::eq) ++n_slack;
        if (r.sense != Sense::le) ++n_art;
    }

    Tableau tab;
    tab.m = m;
    tab.cols = p.n + n_slack + n_art;
    tab.t.assign(m, std::vector<double>(tab.cols + 1, 0.0));
    tab.z.assign(tab.cols + 1, 0.0);
    tab.basis.assign(m, -1);
    tab.blocked.assign(tab.cols, false);

    const std::size_t slack0 = p.n;
    const std::size_t art0 = p.n + n_slack;
    std::size_t si = 0, ai = 0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < p.n; ++j) tab.t[i][j] = rows[i].a[j];
        tab.t[i][tab.cols] = rows[i].b;
        if (rows[i].sense == Sense::le) {
            tab.t[i][slack0 + si] = 1.0;
            tab.basis[i] = static_cast<int>(slack0 + si);
            ++si;
        } else {
            if (rows[i].sense == Sense::ge) tab.t[i][slack0 + si++] = -1.0;
            tab.t[i][art0 + ai] = 1.0;
            tab.basis[i] = static_cast<int>(art0 + ai);
            ++ai;
        }
    }

    Solution sol;

    // Phase 1: maximize -(sum of artificials).  Reduced-cost row follows
    // from zeroing the basic artificial columns.
    if (n_art > 0) {
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis[i] < static_cast<int>(art0)) continue;
            for (std::size_t j = 0; j <= tab.cols; ++j) tab.z[j] -= tab.t[i][j];
        }
        for (std::size_t j = art0; j < tab.cols; ++j) tab.z[j] += 1.0;
        tab.run();

        const double residual = -tab.z[tab.cols];
        if (residual > kFeasEps) {
            sol.status = Status::infeasible;
            sol.infeasibility = residual;
            return sol;
        }
        // Pivot leftover artificials out of the basis.  A row where no real
        // column is available is redundant (numerically zero over the real
        // columns with rhs ~ 0) and is dropped.
        for (std::size_t i = 0; i < tab.m;) {
            if (tab.basis[i] < static_cast<int>(art0)) { ++i; continue; }
            bool pivoted = false;
            for (std::size_t j = 0; j < art0; ++j) {
                if (std::fabs(tab.t[i][j]) > kPivotEps) {
                    tab.pivot(i, j);
                    pivoted = true;
                    break;
                }
            }
            if (pivoted) {
                ++i;
            } else {
                tab.t.erase(tab.t.begin() + i);
                tab.basis.erase(tab.basis.begin() + i);
                --tab.m;
            }
        }
        for (std::size_t j = art0; j < tab.cols; ++j) tab.blocked[j] = true;
    }

    // Phase 2: true objective (internally maximization).  Basic columns are
    // exact unit columns, so their reduced costs come out as zero.
    std::vector<double> c(tab.cols, 0.0);
    for (std::size_t j = 0; j < p.n; ++j) c[j] = p.maximize ? p.c[j] : -p.c[j];
    std::fill(tab.z.begin(), tab.z.end(), 0.0);
    for (std::size_t j = 0; j < tab.cols; ++j) tab.z[j] = -c[j];
    for (std::size_t i = 0; i < tab.m; ++i) {
        const int b = tab.basis[i];
        if (b >= 0 && c[b] != 0.0) {
            for (std::size_t j = 0; j <= tab.cols; ++j) tab.z[j] += c[b] * tab.t[i][j];
        }
    }
    tab.run();

    sol.status = Status::optimal;
    sol.x.assign(p.n, 0.0);
    for (std::size_t i = 0; i < tab.m; ++i) {
        const int b = tab.basis[i];
        if (b >= 0 && b < static_cast<int>(p.n)) sol.x[b] = tab.rhs(i);
    }
    double value = 0.0;
    for (std::size_t j = 0; j < p.n; ++j) value += p.c[j] * sol.x[j];
    sol.value = value;
    return sol;
}

} // namespace mpqkd::lp
