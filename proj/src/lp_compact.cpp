#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mnlb/errors.hpp"
#include "mnlb/lp.hpp"
#include "mnlb/rng.hpp"

namespace mnlb {

namespace {

constexpr double kWeightFloor = 1e-12;
constexpr int kEnumGuard = 20;

void check_widening_inputs(const PreferenceVector& v_hat, const std::vector<double>& radii,
                           double omega, const ProblemInstance& inst) {
    inst.validate();
    if (v_hat.size() != inst.n_products) {
        throw InvalidInputError("estimate size does not match instance");
    }
    if (radii.size() != static_cast<std::size_t>(inst.n_products)) {
        throw InvalidInputError("one radius per product required");
    }
    for (double e : radii) {
        if (!std::isfinite(e) || e < 0.0) throw InvalidInputError("radii must be nonnegative");
    }
    if (!std::isfinite(omega) || omega < 0.0 || omega > 1.0) {
        throw InvalidInputError("capacity tightening must lie in [0,1]");
    }
}

// Variable layout of the full program.
int var_x0() { return 0; }
int var_x(int i) { return i; }  // i in 1..N
int var_y(int i, int j, int n) { return 1 + n + (i - 1) * n + (j - 1); }

// Equivalent program when every radius is zero: the y block has zero weight
// everywhere, so only (x0, x) remains. Same row order as the full build.
LinearProgram build_reduced_lp(const PreferenceVector& v_hat, double omega,
                               const ProblemInstance& inst) {
    const int n = inst.n_products;
    const int k = inst.n_resources;
    LinearProgram lp;
    lp.objective.assign(static_cast<std::size_t>(n) + 1, 0.0);
    lp.lower.assign(static_cast<std::size_t>(n) + 1, 0.0);
    lp.upper.assign(static_cast<std::size_t>(n) + 1,
                    std::numeric_limits<double>::infinity());
    for (int i = 1; i <= n; ++i) {
        lp.objective[static_cast<std::size_t>(i)] = inst.rev(i) * v_hat.value(i);
    }
    for (int r = 0; r < k; ++r) {
        LinearProgram::Row row;
        row.coeffs.assign(static_cast<std::size_t>(n) + 1, 0.0);
        for (int i = 1; i <= n; ++i) {
            row.coeffs[static_cast<std::size_t>(i)] = inst.cons(i, r) * v_hat.value(i);
        }
        row.rhs = (1.0 - omega) * inst.capacity_rate[static_cast<std::size_t>(r)];
        lp.rows.push_back(std::move(row));
    }
    {
        LinearProgram::Row row;
        row.coeffs.assign(static_cast<std::size_t>(n) + 1, 0.0);
        row.coeffs[0] = 1.0;
        for (int i = 1; i <= n; ++i) row.coeffs[static_cast<std::size_t>(i)] = v_hat.value(i);
        row.relation = Relation::Equal;
        row.rhs = 1.0;
        lp.rows.push_back(std::move(row));
    }
    for (int i = 1; i <= n; ++i) {
        LinearProgram::Row row;
        row.coeffs.assign(static_cast<std::size_t>(n) + 1, 0.0);
        row.coeffs[static_cast<std::size_t>(i)] = 1.0;
        row.coeffs[0] = -1.0;
        row.rhs = 0.0;
        lp.rows.push_back(std::move(row));
    }
    return lp;
}

// Pins the previous objective to its attained optimum with an equality row and
// re-solves maximizing the no-purchase rate. Keeps the point on a vertex while
// making the sorted-prefix recovery well posed. An equality (not an inequality
// with explicit slack) matters: basis arithmetic then holds the optimal face to
// machine precision, so recovery sees no slack-scale dust weights. The incumbent
// vertex satisfies the row up to dot-product rounding, far inside the phase-1
// feasibility tolerance.
LpSolution resolve_max_x0(LinearProgram lp, double opt) {
    LinearProgram::Row keep;
    keep.coeffs = lp.objective;
    keep.relation = Relation::Equal;
    keep.rhs = opt;
    lp.rows.push_back(std::move(keep));
    std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
    lp.objective[0] = 1.0;
    return solve_lp_basic(lp);
}

AssortmentDistribution prune_and_normalize(std::vector<WeightedAssortment> atoms) {
    double total = 0.0;
    std::vector<WeightedAssortment> kept;
    for (auto& atom : atoms) {
        if (atom.weight > kWeightFloor) {
            total += atom.weight;
            kept.push_back(std::move(atom));
        }
    }
    if (kept.empty() || !(total > 0.0)) {
        throw PreconditionError("distribution has no mass after pruning");
    }
    for (auto& atom : kept) atom.weight /= total;
    return AssortmentDistribution{std::move(kept)};
}

}  // namespace

void AssortmentDistribution::validate(double tol) const {
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (!(atom.weight > 0.0)) throw InvalidInputError("atom weights must be positive");
        total += atom.weight;
    }
    if (std::abs(total - 1.0) > tol) {
        throw InvalidInputError("atom weights must sum to one");
    }
}

Assortment AssortmentDistribution::sample(std::mt19937_64& gen) const {
    if (atoms.empty()) throw InvalidInputError("cannot sample an empty distribution");
    double u = uniform01(gen);
    double acc = 0.0;
    for (const auto& atom : atoms) {
        acc += atom.weight;
        if (u < acc) return atom.assortment;
    }
    return atoms.back().assortment;
}

double widened_reward(const Assortment& s, const PreferenceVector& v_hat,
                      const std::vector<double>& radii, const ProblemInstance& inst) {
    check_widening_inputs(v_hat, radii, 0.0, inst);
    double denom = 1.0 + assortment_weight(s, v_hat);
    double total = 0.0;
    for (int i : s.items()) {
        total += inst.rev(i) *
                 (v_hat.value(i) / denom + radii[static_cast<std::size_t>(i) - 1]);
    }
    return total;
}

double widened_consumption(const Assortment& s, int resource, const PreferenceVector& v_hat,
                           const std::vector<double>& radii, const ProblemInstance& inst) {
    check_widening_inputs(v_hat, radii, 0.0, inst);
    if (resource < 0 || resource >= inst.n_resources) {
        throw InvalidInputError("resource index out of range");
    }
    double denom = 1.0 + assortment_weight(s, v_hat);
    double total = 0.0;
    for (int i : s.items()) {
        total += inst.cons(i, resource) *
                 (v_hat.value(i) / denom - radii[static_cast<std::size_t>(i) - 1]);
    }
    return total;
}

LinearProgram build_compact_lp(const PreferenceVector& v_hat, const std::vector<double>& radii,
                               double omega, const ProblemInstance& inst) {
    check_widening_inputs(v_hat, radii, omega, inst);
    const int n = inst.n_products;
    const int k = inst.n_resources;
    const std::size_t nv = static_cast<std::size_t>(n) * n + n + 1;

    LinearProgram lp;
    lp.objective.assign(nv, 0.0);
    lp.lower.assign(nv, 0.0);
    lp.upper.assign(nv, std::numeric_limits<double>::infinity());
    for (int i = 1; i <= n; ++i) {
        double ri = inst.rev(i);
        double ei = radii[static_cast<std::size_t>(i) - 1];
        lp.objective[static_cast<std::size_t>(var_x(i))] = ri * (v_hat.value(i) + ei);
        for (int j = 1; j <= n; ++j) {
            lp.objective[static_cast<std::size_t>(var_y(i, j, n))] = ri * ei * v_hat.value(j);
        }
    }

    for (int r = 0; r < k; ++r) {
        LinearProgram::Row row;
        row.coeffs.assign(nv, 0.0);
        for (int i = 1; i <= n; ++i) {
            double a = inst.cons(i, r);
            double ei = radii[static_cast<std::size_t>(i) - 1];
            row.coeffs[static_cast<std::size_t>(var_x(i))] = a * (v_hat.value(i) - ei);
            for (int j = 1; j <= n; ++j) {
                row.coeffs[static_cast<std::size_t>(var_y(i, j, n))] = -a * ei * v_hat.value(j);
            }
        }
        row.rhs = (1.0 - omega) * inst.capacity_rate[static_cast<std::size_t>(r)];
        lp.rows.push_back(std::move(row));
    }
    {
        LinearProgram::Row row;
        row.coeffs.assign(nv, 0.0);
        row.coeffs[static_cast<std::size_t>(var_x0())] = 1.0;
        for (int i = 1; i <= n; ++i) {
            row.coeffs[static_cast<std::size_t>(var_x(i))] = v_hat.value(i);
        }
        row.relation = Relation::Equal;
        row.rhs = 1.0;
        lp.rows.push_back(std::move(row));
    }
    for (int i = 1; i <= n; ++i) {
        LinearProgram::Row row;
        row.coeffs.assign(nv, 0.0);
        row.coeffs[static_cast<std::size_t>(var_x(i))] = 1.0;
        row.coeffs[static_cast<std::size_t>(var_x0())] = -1.0;
        lp.rows.push_back(std::move(row));
    }
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            LinearProgram::Row row;
            row.coeffs.assign(nv, 0.0);
            row.coeffs[static_cast<std::size_t>(var_y(i, j, n))] = 1.0;
            row.coeffs[static_cast<std::size_t>(var_x(i))] = -1.0;
            lp.rows.push_back(std::move(row));
        }
    }
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            LinearProgram::Row row;
            row.coeffs.assign(nv, 0.0);
            row.coeffs[static_cast<std::size_t>(var_y(i, j, n))] = 1.0;
            row.coeffs[static_cast<std::size_t>(var_x(j))] = -1.0;
            lp.rows.push_back(std::move(row));
        }
    }
    return lp;
}

CompactSolution solve_compact(const PreferenceVector& v_hat, const std::vector<double>& radii,
                              double omega, const ProblemInstance& inst) {
    check_widening_inputs(v_hat, radii, omega, inst);
    const int n = inst.n_products;
    const int k = inst.n_resources;
    bool widened = std::any_of(radii.begin(), radii.end(), [](double e) { return e != 0.0; });

    CompactSolution out;
    out.x.assign(static_cast<std::size_t>(n), 0.0);
    out.y.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    out.is_vertex = true;

    if (widened) {
        LinearProgram lp = build_compact_lp(v_hat, radii, omega, inst);
        LpSolution first = solve_lp_basic(lp);
        out.objective = first.objective;
        out.resource_duals.assign(first.duals.begin(), first.duals.begin() + k);
        LpSolution second = resolve_max_x0(std::move(lp), first.objective);
        out.x0 = second.x[static_cast<std::size_t>(var_x0())];
        for (int i = 1; i <= n; ++i) {
            out.x[static_cast<std::size_t>(i) - 1] = second.x[static_cast<std::size_t>(var_x(i))];
            for (int j = 1; j <= n; ++j) {
                out.y[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1] =
                    second.x[static_cast<std::size_t>(var_y(i, j, n))];
            }
        }
    } else {
        LinearProgram lp = build_reduced_lp(v_hat, omega, inst);
        LpSolution first = solve_lp_basic(lp);
        out.objective = first.objective;
        out.resource_duals.assign(first.duals.begin(), first.duals.begin() + k);
        LpSolution second = resolve_max_x0(std::move(lp), first.objective);
        out.x0 = second.x[0];
        for (int i = 0; i < n; ++i) {
            out.x[static_cast<std::size_t>(i)] = second.x[static_cast<std::size_t>(i) + 1];
        }
        // With zero radii any y in [0, min(xi, xj)] is both optimal and
        // feasible; pick the upper envelope so downstream invariants on y
        // hold with equality.
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                out.y[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    std::min(out.x[static_cast<std::size_t>(i)], out.x[static_cast<std::size_t>(j)]);
            }
        }
    }
    return out;
}

AssortmentDistribution recover_distribution(const CompactSolution& sol,
                                            const PreferenceVector& v_hat) {
    if (!sol.is_vertex) {
        throw PreconditionError("distribution recovery needs a basic optimal solution");
    }
    const int n = v_hat.size();
    if (sol.x.size() != static_cast<std::size_t>(n)) {
        throw InvalidInputError("solution size does not match estimate");
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double xa = sol.x[static_cast<std::size_t>(a) - 1];
        double xb = sol.x[static_cast<std::size_t>(b) - 1];
        if (xa != xb) return xa > xb;
        return a < b;
    });

    std::vector<WeightedAssortment> atoms;
    atoms.reserve(static_cast<std::size_t>(n) + 1);
    double first_x = n > 0 ? sol.x[static_cast<std::size_t>(order[0]) - 1] : 0.0;
    atoms.push_back({Assortment{}, std::max(0.0, sol.x0 - first_x)});

    std::vector<int> prefix;
    prefix.reserve(static_cast<std::size_t>(n));
    double mass = 0.0;  // attraction weight of the prefix
    for (int l = 0; l < n; ++l) {
        prefix.push_back(order[static_cast<std::size_t>(l)]);
        mass += v_hat.value(order[static_cast<std::size_t>(l)]);
        double xl = sol.x[static_cast<std::size_t>(order[static_cast<std::size_t>(l)]) - 1];
        double xnext =
            (l + 1 < n) ? sol.x[static_cast<std::size_t>(order[static_cast<std::size_t>(l) + 1]) - 1]
                        : 0.0;
        double w = std::max(0.0, xl - xnext) * (1.0 + mass);
        atoms.push_back({Assortment(prefix), w});
    }
    return prune_and_normalize(std::move(atoms));
}

AssortmentDistribution reduce_support(const AssortmentDistribution& dist,
                                      const PreferenceVector& v_hat,
                                      const std::vector<double>& radii, double omega,
                                      const ProblemInstance& inst) {
    check_widening_inputs(v_hat, radii, omega, inst);
    dist.validate();
    const int k = inst.n_resources;
    if (dist.atoms.size() <= static_cast<std::size_t>(k) + 1) return dist;

    const std::size_t na = dist.atoms.size();
    LinearProgram lp;
    lp.objective.assign(na, 0.0);
    lp.lower.assign(na, 0.0);
    lp.upper.assign(na, std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < na; ++s) {
        lp.objective[s] = widened_reward(dist.atoms[s].assortment, v_hat, radii, inst);
    }
    for (int r = 0; r < k; ++r) {
        LinearProgram::Row row;
        row.coeffs.resize(na);
        for (std::size_t s = 0; s < na; ++s) {
            row.coeffs[s] = widened_consumption(dist.atoms[s].assortment, r, v_hat, radii, inst);
        }
        row.rhs = (1.0 - omega) * inst.capacity_rate[static_cast<std::size_t>(r)];
        lp.rows.push_back(std::move(row));
    }
    {
        LinearProgram::Row row;
        row.coeffs.assign(na, 1.0);
        row.relation = Relation::Equal;
        row.rhs = 1.0;
        lp.rows.push_back(std::move(row));
    }

    LpSolution sol = solve_lp_basic(lp);
    std::vector<WeightedAssortment> atoms;
    for (std::size_t s = 0; s < na; ++s) {
        if (sol.x[s] > kWeightFloor) {
            atoms.push_back({dist.atoms[s].assortment, sol.x[s]});
        }
    }
    return prune_and_normalize(std::move(atoms));
}

EnumeratedLp enumerate_assortment_lp(const PreferenceVector& v_hat,
                                     const std::vector<double>& radii, double omega,
                                     const ProblemInstance& inst) {
    check_widening_inputs(v_hat, radii, omega, inst);
    const int n = inst.n_products;
    const int k = inst.n_resources;
    if (n > kEnumGuard) {
        throw SizeGuardError("subset enumeration is limited to 20 products");
    }

    const std::size_t ncols = std::size_t{1} << n;
    std::vector<Assortment> sets(ncols);
    LinearProgram lp;
    lp.objective.assign(ncols, 0.0);
    lp.lower.assign(ncols, 0.0);
    lp.upper.assign(ncols, std::numeric_limits<double>::infinity());
    lp.rows.resize(static_cast<std::size_t>(k) + 1);
    for (int r = 0; r <= k; ++r) {
        lp.rows[static_cast<std::size_t>(r)].coeffs.assign(ncols, 0.0);
    }

    std::vector<int> members;
    for (std::size_t mask = 0; mask < ncols; ++mask) {
        members.clear();
        for (int i = 1; i <= n; ++i) {
            if (mask & (std::size_t{1} << (i - 1))) members.push_back(i);
        }
        sets[mask] = Assortment(members);
        lp.objective[mask] = widened_reward(sets[mask], v_hat, radii, inst);
        for (int r = 0; r < k; ++r) {
            lp.rows[static_cast<std::size_t>(r)].coeffs[mask] =
                widened_consumption(sets[mask], r, v_hat, radii, inst);
        }
        lp.rows[static_cast<std::size_t>(k)].coeffs[mask] = 1.0;
    }
    for (int r = 0; r < k; ++r) {
        lp.rows[static_cast<std::size_t>(r)].rhs =
            (1.0 - omega) * inst.capacity_rate[static_cast<std::size_t>(r)];
    }
    lp.rows[static_cast<std::size_t>(k)].relation = Relation::Equal;
    lp.rows[static_cast<std::size_t>(k)].rhs = 1.0;

    LpSolution sol = solve_lp_basic(lp);
    EnumeratedLp out;
    out.objective = sol.objective;
    out.resource_duals.assign(sol.duals.begin(), sol.duals.begin() + k);
    std::vector<WeightedAssortment> atoms;
    for (std::size_t s = 0; s < ncols; ++s) {
        if (sol.x[s] > kWeightFloor) atoms.push_back({sets[s], sol.x[s]});
    }
    out.distribution = prune_and_normalize(std::move(atoms));
    return out;
}

double fluid_benchmark(const ProblemInstance& inst) {
    std::vector<double> zero_radii(static_cast<std::size_t>(inst.n_products), 0.0);
    double opt;
    if (inst.n_products <= 12) {
        opt = enumerate_assortment_lp(inst.true_pref, zero_radii, 0.0, inst).objective;
    } else {
        opt = solve_compact(inst.true_pref, zero_radii, 0.0, inst).objective;
    }
    return static_cast<double>(inst.horizon) * opt;
}

std::vector<double> radii_from_counts(const ExposureCounts& counts,
                                      const ConfidenceParams& conf, int n_products) {
    if (n_products < 1) throw InvalidInputError("need at least one product");
    std::vector<double> radii(static_cast<std::size_t>(n_products), 0.0);
    if (!conf.enabled) return radii;
    if (counts.counts.size() != static_cast<std::size_t>(n_products)) {
        throw InvalidInputError("one exposure count per product required");
    }
    for (int i = 1; i <= n_products; ++i) {
        radii[static_cast<std::size_t>(i) - 1] = conf.radius(counts.of(i), n_products);
    }
    return radii;
}

LinearProgram build_compact_lp(const PreferenceVector& v_hat, const ExposureCounts& counts,
                               const ConfidenceParams& conf, const ProblemInstance& inst) {
    return build_compact_lp(v_hat, radii_from_counts(counts, conf, inst.n_products),
                            conf.enabled ? conf.omega : 0.0, inst);
}

CompactSolution solve_compact(const PreferenceVector& v_hat, const ExposureCounts& counts,
                              const ConfidenceParams& conf, const ProblemInstance& inst) {
    return solve_compact(v_hat, radii_from_counts(counts, conf, inst.n_products),
                         conf.enabled ? conf.omega : 0.0, inst);
}

AssortmentDistribution reduce_support(const AssortmentDistribution& dist,
                                      const PreferenceVector& v_hat,
                                      const ExposureCounts& counts, const ConfidenceParams& conf,
                                      const ProblemInstance& inst) {
    return reduce_support(dist, v_hat, radii_from_counts(counts, conf, inst.n_products),
                          conf.enabled ? conf.omega : 0.0, inst);
}

EnumeratedLp enumerate_assortment_lp(const PreferenceVector& v_hat,
                                     const ExposureCounts& counts, const ConfidenceParams& conf,
                                     const ProblemInstance& inst) {
    return enumerate_assortment_lp(v_hat, radii_from_counts(counts, conf, inst.n_products),
                                   conf.enabled ? conf.omega : 0.0, inst);
}

}  // namespace mnlb
