#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "mnlb/errors.hpp"
#include "mnlb/lp.hpp"

namespace mnlb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kDegenTol = 1e-11;
constexpr int kRefineRowCap = 2000;

// Tableau over the transformed system: every row carries a slack column
// (fixed at zero for equalities), rows with negative initial residual are
// negated so each starting basic column is +e_i, and equality rows get an
// artificial column. Column states: basic, at lower bound, at upper bound.
struct Tableau {
    int m = 0;
    int n = 0;        // total columns
    int n_struct = 0;
    std::vector<double> a;    // m*n row-major, current B^-1 * A
    std::vector<double> a0;   // untouched copy for refinement
    std::vector<double> rhs0; // transformed right-hand sides
    std::vector<double> xb;   // basic values per row
    std::vector<double> red;  // reduced costs per column
    std::vector<double> lo, hi;
    std::vector<double> cost;
    std::vector<int> basis;           // row -> column
    std::vector<signed char> where;   // column: -1 lower, +1 upper, 0 basic
    std::vector<signed char> row_sign;
    int first_artificial = 0;  // columns >= this are artificial
    int iterations = 0;

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    double bound_value(int j) const { return where[j] > 0 ? hi[j] : lo[j]; }
};

void pivot_rows(Tableau& t, int lrow, int je) {
    double piv = t.at(lrow, je);
    double inv = 1.0 / piv;
    for (int j = 0; j < t.n; ++j) t.at(lrow, j) *= inv;
    t.at(lrow, je) = 1.0;
    for (int i = 0; i < t.m; ++i) {
        if (i == lrow) continue;
        double f = t.at(i, je);
        if (f == 0.0) continue;
        for (int j = 0; j < t.n; ++j) t.at(i, j) -= f * t.at(lrow, j);
        t.at(i, je) = 0.0;
    }
    double fr = t.red[je];
    if (fr != 0.0) {
        for (int j = 0; j < t.n; ++j) t.red[j] -= fr * t.at(lrow, j);
    }
    t.red[je] = 0.0;
}

void compute_reduced(Tableau& t) {
    for (int j = 0; j < t.n; ++j) t.red[j] = t.cost[j];
    for (int i = 0; i < t.m; ++i) {
        double cb = t.cost[t.basis[i]];
        if (cb == 0.0) continue;
        for (int j = 0; j < t.n; ++j) t.red[j] -= cb * t.at(i, j);
    }
    for (int i = 0; i < t.m; ++i) t.red[t.basis[i]] = 0.0;
}

// One simplex phase with the current cost vector. Returns false on
// unboundedness.
bool run_phase(Tableau& t, int iter_cap) {
    bool bland = false;
    int degenerate_streak = 0;
    const int bland_trigger = 10 * (t.m + t.n);

    while (true) {
        if (++t.iterations > iter_cap) {
            throw Error("simplex iteration limit exceeded");
        }
        int je = -1;
        int dir = 0;
        double best = kOptTol;
        for (int j = 0; j < t.n; ++j) {
            if (t.where[j] == 0 || t.lo[j] == t.hi[j]) continue;
            double d = t.red[j];
            int dj = 0;
            if (t.where[j] < 0 && d > kOptTol) dj = 1;
            else if (t.where[j] > 0 && d < -kOptTol) dj = -1;
            if (dj == 0) continue;
            if (bland) {
                je = j;
                dir = dj;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                je = j;
                dir = dj;
            }
        }
        if (je < 0) return true;  // optimal for this phase

        // Ratio test: entering moves by step*dir, basics move by -a(i,je)*dir.
        double flip_cap = t.hi[je] - t.lo[je];  // may be +inf
        double best_step = kInf;
        double best_alpha = 0.0;
        int lrow = -1;
        signed char leave_to = 0;
        for (int i = 0; i < t.m; ++i) {
            double alpha = t.at(i, je) * dir;
            double step;
            signed char to;
            if (alpha > kPivotTol) {
                step = (t.xb[i] - t.lo[t.basis[i]]) / alpha;
                to = -1;
            } else if (alpha < -kPivotTol && t.hi[t.basis[i]] < kInf) {
                step = (t.hi[t.basis[i]] - t.xb[i]) / (-alpha);
                to = 1;
            } else {
                continue;
            }
            if (step < 0.0) step = 0.0;  // basic wandered past its bound
            bool better = step < best_step - kDegenTol;
            if (!better && step < best_step + kDegenTol && lrow >= 0) {
                better = bland ? t.basis[i] < t.basis[lrow]
                               : std::abs(alpha) > std::abs(best_alpha);
            }
            if (better || lrow < 0) {
                best_step = std::min(step, best_step);
                best_alpha = alpha;
                lrow = i;
                leave_to = to;
            }
        }

        double step = std::min(best_step, flip_cap);
        if (step == kInf) return false;  // unbounded direction

        if (step <= kDegenTol) {
            if (++degenerate_streak > bland_trigger) bland = true;
        } else {
            degenerate_streak = 0;
        }

        if (flip_cap < best_step) {
            // Entering variable jumps to its other bound, basis unchanged.
            for (int i = 0; i < t.m; ++i) t.xb[i] -= t.at(i, je) * dir * flip_cap;
            t.where[je] = static_cast<signed char>(-t.where[je]);
            continue;
        }

        double enter_val = t.bound_value(je) + dir * step;
        for (int i = 0; i < t.m; ++i) {
            if (i != lrow) t.xb[i] -= t.at(i, je) * dir * step;
        }
        int jl = t.basis[lrow];
        t.where[jl] = leave_to;
        pivot_rows(t, lrow, je);
        t.basis[lrow] = je;
        t.where[je] = 0;
        t.xb[lrow] = enter_val;
    }
}

Tableau build_tableau(const LinearProgram& lp) {
    const int m = lp.num_rows();
    const int ns = lp.num_vars();

    std::vector<double> residual(m);
    std::vector<int> art_of_row(m, -1);
    int n_art = 0;
    for (int i = 0; i < m; ++i) {
        double r = lp.rows[i].rhs;
        for (int j = 0; j < ns; ++j) r -= lp.rows[i].coeffs[j] * lp.lower[j];
        residual[i] = r;
        if (lp.rows[i].relation == Relation::Equal || r < 0.0) {
            art_of_row[i] = n_art++;
        }
    }

    Tableau t;
    t.m = m;
    t.n_struct = ns;
    t.first_artificial = ns + m;
    t.n = ns + m + n_art;
    t.a.assign(static_cast<std::size_t>(m) * t.n, 0.0);
    t.rhs0.assign(m, 0.0);
    t.xb.assign(m, 0.0);
    t.red.assign(t.n, 0.0);
    t.cost.assign(t.n, 0.0);
    t.basis.assign(m, -1);
    t.where.assign(t.n, -1);
    t.row_sign.assign(m, 1);
    t.lo = lp.lower;
    t.hi = lp.upper;
    t.lo.resize(t.n, 0.0);
    t.hi.resize(t.n, kInf);
    for (int i = 0; i < m; ++i) {
        if (lp.rows[i].relation == Relation::Equal) {
            t.hi[ns + i] = 0.0;  // fixed slack keeps the dual readable
        }
    }

    for (int i = 0; i < m; ++i) {
        double sign = (residual[i] < 0.0) ? -1.0 : 1.0;
        t.row_sign[i] = static_cast<signed char>(sign);
        for (int j = 0; j < ns; ++j) t.at(i, j) = sign * lp.rows[i].coeffs[j];
        t.at(i, ns + i) = sign;
        t.rhs0[i] = sign * lp.rows[i].rhs;
        double r = sign * residual[i];
        if (art_of_row[i] >= 0) {
            int ja = t.first_artificial + art_of_row[i];
            t.at(i, ja) = 1.0;
            t.basis[i] = ja;
            t.where[ja] = 0;
            t.xb[i] = r;
        } else {
            t.basis[i] = ns + i;
            t.where[ns + i] = 0;
            t.xb[i] = r;
        }
    }
    t.a0 = t.a;
    return t;
}

// Pivot basic artificials out where possible, then freeze all artificials.
void retire_artificials(Tableau& t) {
    for (int i = 0; i < t.m; ++i) {
        if (t.basis[i] < t.first_artificial) continue;
        int je = -1;
        for (int j = 0; j < t.first_artificial; ++j) {
            if (t.where[j] == 0) continue;
            if (std::abs(t.at(i, j)) > kPivotTol) {
                je = j;
                break;
            }
        }
        if (je < 0) continue;  // redundant row, artificial stays basic at zero
        int jl = t.basis[i];
        double enter_val = t.bound_value(je);
        t.where[jl] = -1;
        pivot_rows(t, i, je);
        t.basis[i] = je;
        t.where[je] = 0;
        t.xb[i] = enter_val;
    }
    for (int j = t.first_artificial; j < t.n; ++j) {
        t.lo[j] = 0.0;
        t.hi[j] = 0.0;
    }
}

// Re-derives basic values and duals from the original coefficients via a
// dense factorization of the final basis, washing out accumulated pivot
// error. Skipped for very large bases and on numerically singular ones.
bool refine_solution(const LinearProgram& lp, Tableau& t, std::vector<double>& duals) {
    const int m = t.m;
    if (m > kRefineRowCap) return false;

    auto col0 = [&](int i, int j) { return t.a0[static_cast<std::size_t>(i) * t.n + j]; };

    std::vector<double> b(static_cast<std::size_t>(m) * m);
    std::vector<double> rhs(m);
    std::vector<double> cb(m);
    for (int i = 0; i < m; ++i) {
        rhs[i] = t.rhs0[i];
        cb[i] = t.cost[t.basis[i]];
        for (int r = 0; r < m; ++r) b[static_cast<std::size_t>(r) * m + i] = col0(r, t.basis[i]);
    }
    for (int j = 0; j < t.n; ++j) {
        if (t.where[j] == 0) continue;
        double v = t.bound_value(j);
        if (v == 0.0) continue;
        for (int r = 0; r < m; ++r) rhs[r] -= col0(r, j) * v;
    }

    // LU with partial pivoting on b, factorizing once for both solves.
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    for (int k = 0; k < m; ++k) {
        int p = k;
        double best = std::abs(b[static_cast<std::size_t>(perm[k]) * m + k]);
        for (int r = k + 1; r < m; ++r) {
            double v = std::abs(b[static_cast<std::size_t>(perm[r]) * m + k]);
            if (v > best) {
                best = v;
                p = r;
            }
        }
        if (best < 1e-12) return false;
        std::swap(perm[k], perm[p]);
        double piv = b[static_cast<std::size_t>(perm[k]) * m + k];
        for (int r = k + 1; r < m; ++r) {
            double* row = &b[static_cast<std::size_t>(perm[r]) * m];
            double f = row[k] / piv;
            row[k] = f;
            if (f == 0.0) continue;
            const double* prow = &b[static_cast<std::size_t>(perm[k]) * m];
            for (int j = k + 1; j < m; ++j) row[j] -= f * prow[j];
        }
    }

    auto solve_lu = [&](std::vector<double>& v) {
        std::vector<double> y(m);
        for (int i = 0; i < m; ++i) {
            double s = v[perm[i]];
            const double* row = &b[static_cast<std::size_t>(perm[i]) * m];
            for (int j = 0; j < i; ++j) s -= row[j] * y[j];
            y[i] = s;
        }
        for (int i = m - 1; i >= 0; --i) {
            const double* row = &b[static_cast<std::size_t>(perm[i]) * m];
            for (int j = i + 1; j < m; ++j) y[i] -= row[j] * y[j];
            y[i] /= row[i];
        }
        v = y;
    };
    // Transposed solve for the duals: (PB)^T y = reordered forward/backward.
    auto solve_lu_t = [&](std::vector<double>& v) {
        std::vector<double> y(m);
        // U^T w = v
        for (int i = 0; i < m; ++i) {
            double s = v[i];
            for (int j = 0; j < i; ++j) {
                s -= b[static_cast<std::size_t>(perm[j]) * m + i] * y[j];
            }
            y[i] = s / b[static_cast<std::size_t>(perm[i]) * m + i];
        }
        // L^T z = w
        for (int i = m - 1; i >= 0; --i) {
            for (int j = i + 1; j < m; ++j) {
                y[i] -= b[static_cast<std::size_t>(perm[j]) * m + i] * y[j];
            }
        }
        for (int i = 0; i < m; ++i) v[perm[i]] = y[i];
        return;
    };

    std::vector<double> xb = rhs;
    solve_lu(xb);
    std::vector<double> y = cb;
    solve_lu_t(y);

    for (double v : xb) {
        if (!std::isfinite(v)) return false;
    }
    for (double v : y) {
        if (!std::isfinite(v)) return false;
    }
    t.xb = xb;
    duals.assign(m, 0.0);
    for (int i = 0; i < m; ++i) duals[i] = t.row_sign[i] * y[i];
    (void)lp;
    return true;
}

}  // namespace

void LinearProgram::validate() const {
    const auto nv = objective.size();
    if (nv == 0) throw InvalidInputError("program has no variables");
    if (lower.size() != nv || upper.size() != nv) {
        throw InvalidInputError("bounds size mismatch");
    }
    for (std::size_t j = 0; j < nv; ++j) {
        if (!std::isfinite(lower[j])) throw InvalidInputError("lower bounds must be finite");
        if (std::isnan(upper[j]) || upper[j] < lower[j]) {
            throw InvalidInputError("upper bound below lower bound");
        }
        if (!std::isfinite(objective[j])) throw InvalidInputError("objective must be finite");
    }
    for (const Row& row : rows) {
        if (row.coeffs.size() != nv) throw InvalidInputError("row width mismatch");
        if (!std::isfinite(row.rhs)) throw InvalidInputError("rhs must be finite");
        for (double c : row.coeffs) {
            if (!std::isfinite(c)) throw InvalidInputError("row coefficients must be finite");
        }
    }
}

LpSolution solve_lp_basic(const LinearProgram& lp) {
    lp.validate();
    Tableau t = build_tableau(lp);
    const int iter_cap = 10000 + 200 * (t.m + t.n);

    double rhs_scale = 1.0;
    for (const auto& row : lp.rows) rhs_scale = std::max(rhs_scale, std::abs(row.rhs));

    if (t.first_artificial < t.n) {
        for (int j = 0; j < t.n; ++j) {
            t.cost[j] = (j >= t.first_artificial) ? -1.0 : 0.0;
        }
        compute_reduced(t);
        if (!run_phase(t, iter_cap)) {
            throw Error("feasibility phase reported an unbounded direction");
        }
        double infeas = 0.0;
        for (int i = 0; i < t.m; ++i) {
            if (t.basis[i] >= t.first_artificial) infeas += t.xb[i];
        }
        for (int j = t.first_artificial; j < t.n; ++j) {
            if (t.where[j] > 0) infeas += t.hi[j];
        }
        if (infeas > 1e-7 * rhs_scale) {
            throw InfeasibleLpError("program has no feasible point");
        }
        retire_artificials(t);
    }

    for (int j = 0; j < t.n; ++j) {
        t.cost[j] = (j < t.n_struct) ? lp.objective[j] : 0.0;
    }
    compute_reduced(t);
    if (!run_phase(t, iter_cap)) {
        throw UnboundedLpError("objective is unbounded above");
    }

    LpSolution sol;
    sol.iterations = t.iterations;
    sol.duals.assign(t.m, 0.0);
    bool refined = refine_solution(lp, t, sol.duals);
    if (!refined) {
        for (int i = 0; i < t.m; ++i) sol.duals[i] = -t.red[t.n_struct + i];
    }

    sol.x.assign(t.n_struct, 0.0);
    std::vector<int> row_of(t.n, -1);
    for (int i = 0; i < t.m; ++i) row_of[t.basis[i]] = i;
    for (int j = 0; j < t.n_struct; ++j) {
        double v = (row_of[j] >= 0) ? t.xb[row_of[j]] : t.bound_value(j);
        sol.x[j] = std::clamp(v, lp.lower[j], lp.upper[j]);
    }
    sol.objective = 0.0;
    for (int j = 0; j < t.n_struct; ++j) sol.objective += lp.objective[j] * sol.x[j];
    return sol;
}

void dump_lp(const LinearProgram& lp, std::ostream& os) {
    os << "lp " << lp.num_rows() << " " << lp.num_vars() << "\n";
    os.precision(17);
    os << "max\n";
    for (int j = 0; j < lp.num_vars(); ++j) {
        os << lp.objective[j] << (j + 1 == lp.num_vars() ? "\n" : " ");
    }
    os << "subject\n";
    for (const auto& row : lp.rows) {
        for (double c : row.coeffs) os << c << " ";
        os << (row.relation == Relation::Equal ? "=" : "<=") << " " << row.rhs << "\n";
    }
    os << "bounds\n";
    for (int j = 0; j < lp.num_vars(); ++j) {
        os << lp.lower[j] << " ";
        if (lp.upper[j] == kInf) {
            os << "inf\n";
        } else {
            os << lp.upper[j] << "\n";
        }
    }
    os << "end\n";
}

double lp_max_violation(const LinearProgram& lp, const std::vector<double>& x) {
    if (x.size() != static_cast<std::size_t>(lp.num_vars())) {
        throw InvalidInputError("candidate size mismatch");
    }
    double worst = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) {
        worst = std::max(worst, lp.lower[j] - x[j]);
        if (lp.upper[j] < kInf) worst = std::max(worst, x[j] - lp.upper[j]);
    }
    for (const auto& row : lp.rows) {
        double lhs = 0.0;
        for (int j = 0; j < lp.num_vars(); ++j) lhs += row.coeffs[j] * x[j];
        if (row.relation == Relation::Equal) {
            worst = std::max(worst, std::abs(lhs - row.rhs));
        } else {
            worst = std::max(worst, lhs - row.rhs);
        }
    }
    return worst;
}

}  // namespace mnlb
