#include "mnlb/policy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mnlb/errors.hpp"
#include "mnlb/rng.hpp"

namespace mnlb {

namespace {

// ceil(x) that forgives sub-1e-9 floating point overshoot of an integer.
long ceil_guarded(double x) {
    double r = std::round(x);
    if (std::abs(x - r) < 1e-9 * std::max(1.0, std::abs(r))) return static_cast<long>(r);
    return static_cast<long>(std::ceil(x));
}

}  // namespace

long budget_from_alpha(double alpha, long horizon, int n_products, int n_resources) {
    if (!(alpha >= 0.0) || !(alpha <= 1.0)) {
        throw InvalidInputError("alpha must lie in [0,1]");
    }
    if (horizon < 1 || n_products < 1 || n_resources < 0) {
        throw InvalidInputError("budget derivation needs positive sizes");
    }
    long q = ceil_guarded(std::pow(static_cast<double>(horizon), alpha));
    return n_products + static_cast<long>(n_resources + 1) * q;
}

long default_warm_start(long horizon, int n_products) {
    if (horizon < 1 || n_products < 1) {
        throw InvalidInputError("warm start derivation needs positive sizes");
    }
    long s = ceil_guarded(std::sqrt(static_cast<double>(horizon)));
    long n = n_products;
    return ((s + n - 1) / n) * n;
}

EpochSchedule make_schedule(long horizon, long tau, long budget, int n_products,
                            int n_resources) {
    if (n_products < 1 || n_resources < 0) {
        throw InvalidInputError("schedule needs positive sizes");
    }
    if (tau < n_products || tau >= horizon) {
        throw InvalidInputError("warm start must satisfy N <= tau < T");
    }
    long q = (budget - n_products) / (n_resources + 1);
    if (budget < n_products || q < 1) {
        throw InvalidBudgetError("switch budget below N + (K+1)");
    }
    // More cycles than remaining periods cannot be scheduled; cap so each
    // cycle covers at least one period (the budget is then slack).
    q = std::min(q, horizon - tau);

    EpochSchedule sched;
    sched.q = q;
    sched.boundaries.resize(static_cast<std::size_t>(q) + 1);
    long base = (horizon - tau) / q;
    sched.boundaries[0] = tau;
    for (long l = 1; l <= q; ++l) {
        sched.boundaries[static_cast<std::size_t>(l)] = tau + l * base;
    }
    sched.boundaries[static_cast<std::size_t>(q)] = horizon;
    return sched;
}

bool warm_start(SimState& state, const ProblemInstance& inst, long tau, std::mt19937_64& gen) {
    if (state.period != 0 || !state.log.empty()) {
        throw LifecycleError("warm start needs a fresh state");
    }
    const long n = inst.n_products;
    if (tau < n) throw InvalidInputError("warm start shorter than the catalog");
    long base = tau / n;
    long extra = tau % n;
    for (int i = 1; i <= n; ++i) {
        long reps = base + (i <= extra ? 1 : 0);
        Assortment single(std::vector<int>{i});
        for (long rep = 0; rep < reps; ++rep) {
            if (state.stopped) return false;
            offer(state, single, inst, gen);
        }
    }
    return !state.stopped;
}

EpochPlan plan_epoch(const PreferenceVector& v_hat, const ExposureCounts& counts,
                     const ConfidenceParams& conf, const ProblemInstance& inst) {
    const int n = inst.n_products;
    std::vector<double> radii(static_cast<std::size_t>(n), 0.0);
    double omega = 0.0;
    if (conf.enabled) {
        if (counts.counts.size() != static_cast<std::size_t>(n)) {
            throw InvalidInputError("one exposure count per product required");
        }
        for (int i = 1; i <= n; ++i) {
            radii[static_cast<std::size_t>(i) - 1] = conf.radius(counts.of(i), n);
        }
        omega = conf.omega;
    }

    EpochPlan plan;
    try {
        plan.solution = solve_compact(v_hat, radii, omega, inst);
    } catch (const InfeasibleLpError&) {
        if (omega == 0.0) throw;
        plan.omega_fallback = true;
        omega = 0.0;
        plan.solution = solve_compact(v_hat, radii, omega, inst);
    }
    AssortmentDistribution recovered = recover_distribution(plan.solution, v_hat);
    plan.distribution = reduce_support(recovered, v_hat, radii, omega, inst);
    return plan;
}

namespace {

void check_assumption_warnings(const ProblemInstance& inst, long tau, double delta,
                               std::vector<std::string>& warnings) {
    if (inst.n_resources == 0) return;
    double arg = 4.0 * inst.n_products * inst.n_resources / delta;
    if (arg <= 1.0) return;
    double lhs = static_cast<double>(tau) * std::sqrt(std::log(arg));
    for (int k = 0; k < inst.n_resources; ++k) {
        double cap = static_cast<double>(inst.horizon) *
                     inst.capacity_rate[static_cast<std::size_t>(k)];
        if (lhs > cap) {
            warnings.push_back("warm start length may crowd out resource " +
                               std::to_string(k) + " at this horizon");
            return;
        }
    }
}

}  // namespace

SimResult run_policy(const ProblemInstance& inst, const PolicyConfig& cfg) {
    inst.validate();
    const long t_horizon = inst.horizon;
    const int n = inst.n_products;
    const int k = inst.n_resources;

    if (!(cfg.delta > 0.0) || !(cfg.delta < 1.0)) {
        throw InvalidInputError("delta must lie in (0,1)");
    }
    long budget;
    if (cfg.switch_budget.has_value()) {
        budget = *cfg.switch_budget;
    } else if (cfg.alpha.has_value()) {
        budget = budget_from_alpha(*cfg.alpha, t_horizon, n, k);
    } else {
        throw InvalidInputError("policy needs a switch budget or an alpha");
    }
    long tau = cfg.warm_start > 0 ? cfg.warm_start : default_warm_start(t_horizon, n);

    SimResult result;
    result.schedule = make_schedule(t_horizon, tau, budget, n, k);
    result.switch_budget = budget;
    result.warm_start_length = tau;
    check_assumption_warnings(inst, tau, cfg.delta, result.warnings);

    ConfidenceParams conf;
    conf.enabled = cfg.conf_enabled;
    conf.delta = cfg.delta;
    if (cfg.conf_enabled) {
        conf.psi = compute_psi(inst.utility_bound, n, t_horizon, result.schedule.q, k,
                               cfg.delta, cfg.psi_fold_resources);
        OmegaResult om = compute_omega(inst, tau, result.schedule.q, conf.psi, cfg.delta);
        if (om.exceeds_one) {
            result.warnings.push_back("capacity tightening above 1, clamped to 0.5");
        }
        conf.omega = std::min(om.value, 0.5);
    }

    std::mt19937_64 gen(cfg.seed);
    result.state = init_state(inst);
    result.warm_start_complete = warm_start(result.state, inst, tau, gen);
    if (!result.warm_start_complete) {
        result.depletion_period = result.state.period;
        result.warnings.push_back("market stopped during warm start");
        return result;
    }

    GroupedHistory grouped(n);
    grouped.absorb(result.state.log);
    std::size_t absorbed = result.state.log.size();
    std::vector<double> prev_theta;

    for (long l = 1; l <= result.schedule.q; ++l) {
        if (result.state.stopped) break;
        long block = result.schedule.boundaries[static_cast<std::size_t>(l)] -
                     result.schedule.boundaries[static_cast<std::size_t>(l) - 1];

        MleResult fit = fit_mle(grouped, inst.utility_bound, cfg.mle,
                                prev_theta.empty() ? nullptr : &prev_theta);
        prev_theta = fit.theta;
        ExposureCounts counts{grouped.exposure_totals()};

        EpochPlan plan = plan_epoch(fit.preferences, counts, conf, inst);
        const auto& atoms = plan.distribution.atoms;

        // One i.i.d. draw per period of the block, then each distinct
        // assortment is offered for its tally in first-drawn order.
        std::vector<long> tally(atoms.size(), 0);
        std::vector<std::size_t> order;
        for (long t = 0; t < block; ++t) {
            double u = uniform01(gen);
            double acc = 0.0;
            std::size_t pick = atoms.size() - 1;
            for (std::size_t s = 0; s < atoms.size(); ++s) {
                acc += atoms[s].weight;
                if (u < acc) {
                    pick = s;
                    break;
                }
            }
            if (tally[pick] == 0) order.push_back(pick);
            ++tally[pick];
        }

        double revenue_before = result.state.cum_revenue;
        for (std::size_t s : order) {
            for (long rep = 0; rep < tally[s]; ++rep) {
                if (result.state.stopped) break;
                offer(result.state, atoms[s].assortment, inst, gen);
            }
            if (result.state.stopped) break;
        }

        EpochDiagnostics diag;
        diag.epoch = l;
        diag.v_hat = fit.preferences.values();
        diag.lp_objective = plan.solution.objective;
        diag.support_size = static_cast<int>(atoms.size());
        diag.epoch_revenue = result.state.cum_revenue - revenue_before;
        diag.inventory_after = result.state.inventory;
        diag.omega_fallback = plan.omega_fallback;
        result.epochs.push_back(std::move(diag));
        if (plan.omega_fallback) {
            result.warnings.push_back("planning fell back to untightened capacity in cycle " +
                                      std::to_string(l));
        }

        grouped.absorb(result.state.log, absorbed);
        absorbed = result.state.log.size();
    }

    if (result.state.stopped) result.depletion_period = result.state.period;
    return result;
}

void write_epoch_diagnostics(const std::vector<EpochDiagnostics>& epochs, std::ostream& os) {
    os.precision(17);
    for (const EpochDiagnostics& d : epochs) {
        os << "epoch=" << d.epoch << " objective=" << d.lp_objective
           << " support=" << d.support_size << " revenue=" << d.epoch_revenue
           << " omega_fallback=" << (d.omega_fallback ? 1 : 0) << " v_hat=";
        for (std::size_t i = 0; i < d.v_hat.size(); ++i) {
            if (i > 0) os << ",";
            os << d.v_hat[i];
        }
        os << " inventory=";
        for (std::size_t i = 0; i < d.inventory_after.size(); ++i) {
            if (i > 0) os << ",";
            os << d.inventory_after[i];
        }
        os << "\n";
    }
}

}  // namespace mnlb
