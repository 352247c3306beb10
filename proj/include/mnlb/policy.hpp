#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mnlb/environment.hpp"
#include "mnlb/estimation.hpp"
#include "mnlb/lp.hpp"

namespace mnlb {

struct PolicyConfig {
    // Either a switch budget or an exponent for the budget family
    // L = N + (K+1) * ceil(T^alpha); the explicit budget wins when both are
    // set. alpha = 0 degenerates to explore-then-exploit, alpha = 1 replans
    // every period.
    std::optional<long> switch_budget;
    std::optional<double> alpha;
    // Warm start length tau; 0 selects ceil(sqrt(T)) rounded up to a multiple
    // of the product count. Must satisfy N <= tau < T.
    long warm_start = 0;
    double delta = 0.05;
    // Apply confidence widening (radii and capacity tightening) in planning.
    // Off by default: at desk scales the theoretical constants exceed any
    // useful magnitude and the plug-in estimate is what the studies use.
    bool conf_enabled = false;
    // Whether the deviation scale folds the resource count into its log term.
    bool psi_fold_resources = true;
    std::uint64_t seed = 0;
    MleOptions mle;
};

struct EpochSchedule {
    long q = 0;  // number of planning cycles
    // T_0 = tau, then T_l = tau + l*floor((T-tau)/q), with the leftover
    // periods folded into the last entry so boundaries.back() == T.
    std::vector<long> boundaries;
};

// Derived quantities of the budget family.
long budget_from_alpha(double alpha, long horizon, int n_products, int n_resources);
long default_warm_start(long horizon, int n_products);

// Partition of (tau, T] into q = floor((L-N)/(K+1)) even blocks. A budget
// that yields q < 1 throws InvalidBudgetError; q is capped at T - tau so
// every block spans at least one period.
EpochSchedule make_schedule(long horizon, long tau, long budget, int n_products,
                            int n_resources);

// Offers each singleton for floor(tau/N) periods, the first tau mod N of them
// once more. Returns false when the market stopped before finishing.
bool warm_start(SimState& state, const ProblemInstance& inst, long tau, std::mt19937_64& gen);

struct EpochPlan {
    CompactSolution solution;
    AssortmentDistribution distribution;
    // Planning was infeasible under capacity tightening and fell back to the
    // untightened program for this cycle.
    bool omega_fallback = false;
};

// One planning cycle: widened program from the current estimate, distribution
// recovery, then support reduction to at most K+1 assortments.
EpochPlan plan_epoch(const PreferenceVector& v_hat, const ExposureCounts& counts,
                     const ConfidenceParams& conf, const ProblemInstance& inst);

struct EpochDiagnostics {
    long epoch = 0;
    std::vector<double> v_hat;
    double lp_objective = 0.0;
    int support_size = 0;
    double epoch_revenue = 0.0;
    std::vector<double> inventory_after;
    bool omega_fallback = false;
};

struct SimResult {
    SimState state;
    EpochSchedule schedule;
    long switch_budget = 0;
    long warm_start_length = 0;
    bool warm_start_complete = false;
    long depletion_period = -1;  // period at which the market stopped, -1 if never
    std::vector<EpochDiagnostics> epochs;
    std::vector<std::string> warnings;
};

// Full run: warm start, then per epoch a maximum-likelihood refit on all
// history, a planning solve, i.i.d. sampling of one assortment per period of
// the epoch, and consecutive offering of each sampled assortment grouped by
// the period it was first drawn. Total switches stay within the budget.
SimResult run_policy(const ProblemInstance& inst, const PolicyConfig& cfg);

// One line per epoch: key=value fields, vectors comma-joined.
void write_epoch_diagnostics(const std::vector<EpochDiagnostics>& epochs, std::ostream& os);

}  // namespace mnlb
