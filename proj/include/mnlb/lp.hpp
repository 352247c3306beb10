#pragma once

#include <iosfwd>
#include <random>
#include <vector>

#include "mnlb/estimation.hpp"
#include "mnlb/mnl.hpp"

namespace mnlb {

enum class Relation { LessEqual, Equal };

// Dense maximization program over nonnegative (or box-bounded) variables.
struct LinearProgram {
    struct Row {
        std::vector<double> coeffs;
        Relation relation = Relation::LessEqual;
        double rhs = 0.0;
    };

    std::vector<double> objective;  // maximize objective . x
    std::vector<Row> rows;
    std::vector<double> lower;  // per-variable, finite
    std::vector<double> upper;  // per-variable, +infinity allowed

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }
    void validate() const;  // throws InvalidInputError
};

struct LpSolution {
    std::vector<double> x;
    double objective = 0.0;
    // One multiplier per constraint row, nonnegative on binding <= rows.
    std::vector<double> duals;
    int iterations = 0;
};

// Two-phase dense primal simplex with bound flipping. Pivots on the largest
// reduced cost and falls back to smallest-index selection after a long
// degenerate streak. Returns a basic optimal solution.
LpSolution solve_lp_basic(const LinearProgram& lp);

// Plain-text dump: objective, rows with relations, bounds. Stable layout for
// feeding external solvers when cross-checking.
void dump_lp(const LinearProgram& lp, std::ostream& os);

// Largest constraint or bound violation of a candidate point.
double lp_max_violation(const LinearProgram& lp, const std::vector<double>& x);

// Mix over assortments; weights are positive and sum to one.
struct WeightedAssortment {
    Assortment assortment;
    double weight = 0.0;
};

struct AssortmentDistribution {
    std::vector<WeightedAssortment> atoms;

    void validate(double tol = 1e-9) const;
    Assortment sample(std::mt19937_64& gen) const;
};

// Solution of the polynomial-size planning program. Variables: x0 for the
// no-purchase rate, x(i) for product purchase rates scaled by 1/v(i), y(i,j)
// the linearization products. Resource duals come from the first optimization
// pass, before the secondary no-purchase maximization.
struct CompactSolution {
    double x0 = 0.0;
    std::vector<double> x;                  // N
    std::vector<std::vector<double>> y;     // N x N
    double objective = 0.0;
    std::vector<double> resource_duals;     // K
    bool is_vertex = false;
};

// Optimistic column value of an assortment: expected revenue with each
// product's rate shifted up by its radius.
double widened_reward(const Assortment& s, const PreferenceVector& v_hat,
                      const std::vector<double>& radii, const ProblemInstance& inst);

// Pessimistic resource use: expected consumption with rates shifted down.
double widened_consumption(const Assortment& s, int resource, const PreferenceVector& v_hat,
                           const std::vector<double>& radii, const ProblemInstance& inst);

// Explicit polynomial-size program equivalent to optimizing over randomized
// assortments with widened columns: n^2+n+1 variables, 2n^2+n+K+1 rows.
// Row order: K resource rows, the normalization equality, x(i) <= x0 rows,
// then y(i,j) <= x(i) rows and y(i,j) <= x(j) rows, both i-major.
LinearProgram build_compact_lp(const PreferenceVector& v_hat, const std::vector<double>& radii,
                               double omega, const ProblemInstance& inst);

// Solves the planning program to optimality, then re-solves at fixed optimum
// maximizing the no-purchase rate so the distribution recovery below always
// starts from a suitable extreme point. When all radii are zero the y block
// is provably inert and an equivalent program without it is solved instead.
CompactSolution solve_compact(const PreferenceVector& v_hat, const std::vector<double>& radii,
                              double omega, const ProblemInstance& inst);

// Turns a basic optimal planning solution into a nested-support distribution
// over assortments: sort x descending (ties by ascending product index), take
// prefixes, weight each by the rate gap times one plus its attraction mass.
// Achieves the planning optimum exactly and stays capacity-feasible.
AssortmentDistribution recover_distribution(const CompactSolution& sol,
                                            const PreferenceVector& v_hat);

// Re-optimizes weights over the given support only, returning a distribution
// on at most K+1 assortments with no loss in widened objective. Inputs with
// at most K+1 atoms pass through unchanged.
AssortmentDistribution reduce_support(const AssortmentDistribution& dist,
                                      const PreferenceVector& v_hat,
                                      const std::vector<double>& radii, double omega,
                                      const ProblemInstance& inst);

struct EnumeratedLp {
    double objective = 0.0;
    AssortmentDistribution distribution;
    std::vector<double> resource_duals;
};

// Reference solve with one column per subset of the catalog. Exponential in
// the product count; guarded to 20 products. Used to validate the compact
// formulation, not by the policy.
EnumeratedLp enumerate_assortment_lp(const PreferenceVector& v_hat,
                                     const std::vector<double>& radii, double omega,
                                     const ProblemInstance& inst);

// Optimal fluid revenue over the horizon under the true preferences with no
// widening: horizon times the planning optimum.
double fluid_benchmark(const ProblemInstance& inst);

// Per-product radii from exposure counts; all zeros when widening is off.
// With widening on, a zero count throws UndefinedRadiusError.
std::vector<double> radii_from_counts(const ExposureCounts& counts,
                                      const ConfidenceParams& conf, int n_products);

// Convenience overloads that derive (radii, omega) from exposure counts and
// the confidence bundle.
LinearProgram build_compact_lp(const PreferenceVector& v_hat, const ExposureCounts& counts,
                               const ConfidenceParams& conf, const ProblemInstance& inst);
CompactSolution solve_compact(const PreferenceVector& v_hat, const ExposureCounts& counts,
                              const ConfidenceParams& conf, const ProblemInstance& inst);
AssortmentDistribution reduce_support(const AssortmentDistribution& dist,
                                      const PreferenceVector& v_hat,
                                      const ExposureCounts& counts, const ConfidenceParams& conf,
                                      const ProblemInstance& inst);
EnumeratedLp enumerate_assortment_lp(const PreferenceVector& v_hat,
                                     const ExposureCounts& counts, const ConfidenceParams& conf,
                                     const ProblemInstance& inst);

}  // namespace mnlb
