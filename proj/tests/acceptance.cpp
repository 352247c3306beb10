// Release gate for the library: nine numbered checks covering planning
// equivalence, distribution recovery, switch and inventory discipline,
// estimator correctness, revenue quality, scaling direction and bitwise
// reproducibility. Prints one PASS/FAIL line per check; exit code 0 only if
// every check passes. Tolerances are pinned here on purpose.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mnlb/environment.hpp"
#include "mnlb/errors.hpp"
#include "mnlb/estimation.hpp"
#include "mnlb/harness.hpp"
#include "mnlb/lp.hpp"
#include "mnlb/mnl.hpp"
#include "mnlb/policy.hpp"
#include "mnlb/rng.hpp"
#include "oracles.hpp"

using namespace mnlb;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool g_all_pass = true;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) g_all_pass = false;
    std::printf("[criterion %d] %s - %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return std::string(buf);
}

double mean(const std::vector<double>& xs) {
    double total = 0.0;
    for (double x : xs) total += x;
    return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

// ---- planning equivalence and recovery (checks 1 and 2) --------------------

struct PlanningStats {
    double max_objective_gap = 0.0;   // relative, compact vs enumerated
    double max_feas_violation = 0.0;  // recovered distribution in the wide program
    double max_value_gap = 0.0;       // recovered value vs compact optimum, absolute
    double elapsed = 0.0;
    int cases = 0;
};

PlanningStats run_planning_comparison() {
    PlanningStats stats;
    auto t0 = Clock::now();
    for (int t = 0; t < 200; ++t) {
        std::mt19937_64 gen(derive_seed({31, static_cast<std::uint64_t>(t)}));
        const int n = 3 + t % 6;
        const int k = 1 + t % 4;
        const double bound = 2.0 + 6.0 * uniform01(gen);
        GammaSpec gamma{n, k, bound};
        auto inst = generate_instance(gamma, derive_seed({31, static_cast<std::uint64_t>(t), 1}));
        for (int mode = 0; mode < 2; ++mode) {
            std::vector<double> radii(static_cast<std::size_t>(n), 0.0);
            double omega = 0.0;
            if (mode == 1) {
                for (double& e : radii) e = 0.001 + 0.099 * uniform01(gen);
                omega = 0.2 * uniform01(gen);
            }
            auto compact = solve_compact(inst.true_pref, radii, omega, inst);
            auto ref = enumerate_assortment_lp(inst.true_pref, radii, omega, inst);
            double gap = std::abs(compact.objective - ref.objective) /
                         (1.0 + std::abs(ref.objective));
            stats.max_objective_gap = std::max(stats.max_objective_gap, gap);

            auto dist = recover_distribution(compact, inst.true_pref);
            double weight_sum = 0.0;
            double value = 0.0;
            std::vector<double> use(static_cast<std::size_t>(k), 0.0);
            for (const auto& atom : dist.atoms) {
                weight_sum += atom.weight;
                value += atom.weight * widened_reward(atom.assortment, inst.true_pref, radii, inst);
                for (int r = 0; r < k; ++r) {
                    use[static_cast<std::size_t>(r)] +=
                        atom.weight *
                        widened_consumption(atom.assortment, r, inst.true_pref, radii, inst);
                }
            }
            double violation = std::abs(weight_sum - 1.0);
            for (int r = 0; r < k; ++r) {
                double cap = (1.0 - omega) * inst.capacity_rate[static_cast<std::size_t>(r)];
                violation = std::max(violation, use[static_cast<std::size_t>(r)] - cap);
            }
            stats.max_feas_violation = std::max(stats.max_feas_violation, violation);
            stats.max_value_gap =
                std::max(stats.max_value_gap, std::abs(value - compact.objective));
            ++stats.cases;
        }
    }
    stats.elapsed = seconds_since(t0);
    return stats;
}

// ---- policy sweeps (checks 3, 4, 7, 8) --------------------------------------

struct GammaCell {
    GammaSpec spec;
    std::vector<ProblemInstance> instances;
    std::vector<double> per_period_opt;
};

GammaCell make_gamma_cell(const GammaSpec& spec, std::size_t gamma_idx, int n_instances) {
    GammaCell cell;
    cell.spec = spec;
    for (int i = 0; i < n_instances; ++i) {
        auto inst = generate_instance(
            spec, derive_seed({1, 1, gamma_idx, static_cast<std::uint64_t>(i)}));
        inst.horizon = 1;
        cell.per_period_opt.push_back(fluid_benchmark(inst));
        cell.instances.push_back(std::move(inst));
    }
    return cell;
}

struct SweepTracker {
    long runs = 0;
    long switch_violations = 0;
    long support_violations = 0;
    double min_inventory = std::numeric_limits<double>::infinity();
    int worst_support = 0;
    std::map<std::string, std::vector<double>> ratios;
};

std::string cell_key(const std::string& label, long horizon, double alpha) {
    return fmt("%s:T%ld:a%.1f", label.c_str(), horizon, alpha);
}

void run_cell(SweepTracker& tracker, const GammaCell& cell, std::size_t gamma_idx,
              int instance_idx, long horizon, double alpha, int runs) {
    ProblemInstance inst = cell.instances[static_cast<std::size_t>(instance_idx)];
    inst.horizon = horizon;
    const int support_cap = inst.n_resources + 1;
    auto& ratio_bucket = tracker.ratios[cell_key(cell.spec.label(), horizon, alpha)];
    for (int r = 0; r < runs; ++r) {
        PolicyConfig cfg;
        cfg.alpha = alpha;
        cfg.seed = derive_seed({1, 2, gamma_idx, static_cast<std::uint64_t>(instance_idx),
                                static_cast<std::uint64_t>(horizon),
                                static_cast<std::uint64_t>(alpha * 2.0),
                                static_cast<std::uint64_t>(r)});
        auto result = run_policy(inst, cfg);
        ++tracker.runs;
        if (result.state.switches > result.switch_budget) ++tracker.switch_violations;
        for (const auto& diag : result.epochs) {
            tracker.worst_support = std::max(tracker.worst_support, diag.support_size);
            if (diag.support_size > support_cap) ++tracker.support_violations;
        }
        for (double inv : result.state.inventory) {
            tracker.min_inventory = std::min(tracker.min_inventory, inv);
        }
        double bench = static_cast<double>(horizon) *
                       cell.per_period_opt[static_cast<std::size_t>(instance_idx)];
        ratio_bucket.push_back(result.state.cum_revenue / bench);
    }
}

// ---- estimator checks (5 and 6) ---------------------------------------------

struct EstimatorStats {
    double max_grad_err = 0.0;
    double max_hess_err = 0.0;
    double max_closed_form_err = 0.0;
    int mc_successes = 0;
    int mc_trials = 0;
};

EstimatorStats run_estimator_checks() {
    EstimatorStats stats;
    for (int t = 0; t < 100; ++t) {
        std::mt19937_64 gen(derive_seed({52, static_cast<std::uint64_t>(t)}));
        int n = 2 + t % 3;
        std::vector<double> v_true(static_cast<std::size_t>(n), 1.0);
        auto history = oracle::random_history(n, 30, v_true, gen);
        auto theta = oracle::random_theta(n, std::log(2.0), gen);
        auto grad = nll_gradient(history, theta);
        auto fd_grad = oracle::fd_gradient(
            [&](const std::vector<double>& p) { return neg_log_likelihood(history, p); }, theta);
        for (std::size_t i = 0; i < grad.size(); ++i) {
            stats.max_grad_err = std::max(
                stats.max_grad_err, std::abs(grad[i] - fd_grad[i]) / (1.0 + std::abs(grad[i])));
        }
        auto hess = nll_hessian(history, theta);
        auto fd_hess = oracle::fd_jacobian(
            [&](const std::vector<double>& p) { return nll_gradient(history, p); }, theta);
        for (Eigen::Index i = 0; i < hess.rows(); ++i) {
            for (Eigen::Index j = 0; j < hess.cols(); ++j) {
                stats.max_hess_err =
                    std::max(stats.max_hess_err, std::abs(hess(i, j) - fd_hess(i, j)) /
                                                     (1.0 + std::abs(hess(i, j))));
            }
        }
    }

    auto singleton_case = [&](long offers, long bought, double bound) {
        SalesHistory h;
        Assortment s(std::vector<int>{1});
        for (long t = 1; t <= offers; ++t) h.append(t, s, t <= bought ? 1 : 0);
        auto fit = fit_mle(h, 1, bound);
        double raw = static_cast<double>(bought) / static_cast<double>(offers - bought);
        double expect = std::min(std::max(raw, 1.0 / bound), bound);
        stats.max_closed_form_err =
            std::max(stats.max_closed_form_err, std::abs(fit.preferences.value(1) - expect));
    };
    singleton_case(100, 50, 5.0);
    singleton_case(100, 80, 10.0);
    std::mt19937_64 cf_gen(derive_seed({53}));
    for (int t = 0; t < 50; ++t) {
        long offers = 20 + static_cast<long>(uniform01(cf_gen) * 180.0);
        long bought = 1 + static_cast<long>(uniform01(cf_gen) * static_cast<double>(offers - 1));
        if (bought >= offers) bought = offers - 1;
        singleton_case(offers, bought, 10.0);
    }

    const int draws = 10000;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 gen(derive_seed({54, static_cast<std::uint64_t>(seed)}));
        double v = std::exp(-std::log(2.0) + 2.0 * std::log(2.0) * uniform01(gen));
        PreferenceVector pref(std::vector<double>{v});
        Assortment s(std::vector<int>{1});
        SalesHistory h;
        for (int t = 1; t <= draws; ++t) h.append(t, s, sample_purchase(s, pref, gen));
        auto fit = fit_mle(h, 1, 10.0);
        double rel = std::abs(fit.preferences.value(1) - v) / v;
        ++stats.mc_trials;
        if (rel <= 0.05) ++stats.mc_successes;
    }
    return stats;
}

double run_curvature_floor_check() {
    double min_eig = std::numeric_limits<double>::infinity();
    const double bound = 2.0;
    for (int t = 0; t < 100; ++t) {
        std::mt19937_64 gen(derive_seed({55, static_cast<std::uint64_t>(t)}));
        int n = 2 + t % 4;
        std::vector<double> v_true(static_cast<std::size_t>(n), 1.0);
        auto history = oracle::random_history(n, 25, v_true, gen);
        auto theta = oracle::random_theta(n, std::log(bound), gen);
        auto hess = nll_hessian(history, theta);
        auto exposures = exposure_counts(history, n);
        double scale = 1.0 / (bound * (1.0 + n * bound) * (1.0 + n * bound));
        for (int i = 0; i < n; ++i) {
            hess(i, i) -= scale * static_cast<double>(exposures.counts[static_cast<std::size_t>(i)]);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
        min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    }
    return min_eig;
}

}  // namespace

int main() {
    std::printf("acceptance checks, tolerances pinned in source\n");

    // 1 + 2: the polynomial-size planning program against the subset
    // enumeration, and the distribution recovered from its vertex solution.
    auto planning = run_planning_comparison();
    report(1, planning.max_objective_gap <= 1e-6 && planning.elapsed < 60.0,
           fmt("%d compact-vs-enumerated solves, max relative objective gap %.3e "
               "(tol 1e-6), %.1fs (budget 60s)",
               planning.cases, planning.max_objective_gap, planning.elapsed));
    report(2, planning.max_feas_violation <= 1e-7 && planning.max_value_gap <= 1e-7,
           fmt("recovered distributions: max feasibility violation %.3e, max value "
               "gap %.3e (tol 1e-7)",
               planning.max_feas_violation, planning.max_value_gap));

    // 3 + 4: full small-horizon sweep; switch budget and support cap must hold
    // on every run and epoch, and inventory must never go negative.
    const std::vector<GammaSpec> grid{{10, 5, 3.0}, {15, 6, 5.0}, {25, 8, 7.0}};
    const std::vector<long> horizons{250, 500, 750, 1000, 1500, 2000, 5000};
    const std::vector<double> alphas{0.0, 0.5};
    std::vector<GammaCell> cells;
    for (std::size_t g = 0; g < grid.size(); ++g) cells.push_back(make_gamma_cell(grid[g], g, 5));

    SweepTracker tracker;
    auto sweep_t0 = Clock::now();
    for (std::size_t g = 0; g < cells.size(); ++g) {
        for (int i = 0; i < 5; ++i) {
            for (long horizon : horizons) {
                for (double alpha : alphas) {
                    run_cell(tracker, cells[g], g, i, horizon, alpha, 10);
                }
            }
        }
    }
    double sweep_elapsed = seconds_since(sweep_t0);
    report(3, tracker.switch_violations == 0 && tracker.support_violations == 0,
           fmt("%ld runs (3 grids x 7 horizons x 2 budgets x 5 instances x 10 runs, %.0fs): "
               "%ld switch budget violations, %ld support cap violations, largest epoch "
               "support %d",
               tracker.runs, sweep_elapsed, tracker.switch_violations,
               tracker.support_violations, tracker.worst_support));

    // 5 + 6 run before the large-horizon cells so estimator failures surface fast.
    auto est = run_estimator_checks();
    report(5, est.max_grad_err <= 1e-5 && est.max_hess_err <= 1e-5 &&
               est.max_closed_form_err <= 1e-8 && est.mc_successes >= 95,
           fmt("finite differences on 100 histories: grad %.3e, hessian %.3e (tol 1e-5); "
               "singleton closed form err %.3e (tol 1e-8); consistency %d/%d within 5%% "
               "at 10^4 draws (need 95)",
               est.max_grad_err, est.max_hess_err, est.max_closed_form_err, est.mc_successes,
               est.mc_trials));

    double curvature = run_curvature_floor_check();
    report(6, curvature >= -1e-9,
           fmt("100 histories: min eigenvalue after subtracting the exposure floor %.3e "
               "(tol -1e-9)",
               curvature));

    // 7: learning-rate direction and large-horizon revenue quality.
    run_cell(tracker, cells[0], 0, 0, 40000, 0.5, 10);
    for (int i = 1; i < 5; ++i) run_cell(tracker, cells[0], 0, i, 40000, 0.5, 10);
    double g1_small_half = mean(tracker.ratios[cell_key("10-5-3", 2000, 0.5)]);
    double g1_small_zero = mean(tracker.ratios[cell_key("10-5-3", 2000, 0.0)]);
    double g1_large_half = mean(tracker.ratios[cell_key("10-5-3", 40000, 0.5)]);
    double g1_tiny_half = mean(tracker.ratios[cell_key("10-5-3", 250, 0.5)]);

    auto big_cell = make_gamma_cell(GammaSpec{50, 12, 12.0}, 3, 5);
    auto big_t0 = Clock::now();
    for (int i = 0; i < 5; ++i) run_cell(tracker, big_cell, 3, i, 40000, 0.5, 10);
    double big_elapsed = seconds_since(big_t0);
    double big_ratio = mean(tracker.ratios[cell_key("50-12-12", 40000, 0.5)]);
    bool crit7 = g1_small_half > g1_small_zero && g1_large_half >= 0.85 && big_elapsed < 1800.0;
    report(7, crit7,
           fmt("10-5-3 grid: mean ratio T=2000 %.4f (frequent replans) vs %.4f (single plan); "
               "T=40000 frequent replans %.4f (need 0.85, T=250 was %.4f); 50-12-12 at "
               "T=40000 took %.0fs (budget 1800s) with mean ratio %.4f (soft target 0.70 %s)",
               g1_small_half, g1_small_zero, g1_large_half, g1_tiny_half, big_elapsed, big_ratio,
               big_ratio >= 0.70 ? "met" : "MISSED, logged as informational"));

    // 8: replanning every period must cost more wall clock than root-spaced
    // replanning at the 25-product grid point.
    auto timed_runs = [&](double alpha, int runs) {
        ProblemInstance inst = cells[2].instances[0];
        inst.horizon = 5000;
        auto t0 = Clock::now();
        for (int r = 0; r < runs; ++r) {
            PolicyConfig cfg;
            cfg.alpha = alpha;
            cfg.seed = derive_seed({9, static_cast<std::uint64_t>(alpha * 2.0),
                                    static_cast<std::uint64_t>(r)});
            auto result = run_policy(inst, cfg);
            for (double inv : result.state.inventory) {
                tracker.min_inventory = std::min(tracker.min_inventory, inv);
            }
            ++tracker.runs;
        }
        return seconds_since(t0);
    };
    double wall_half = timed_runs(0.5, 3);
    double wall_every = timed_runs(1.0, 3);
    report(8, wall_half < wall_every,
           fmt("25-8-7 at T=5000, 3 runs each: root-spaced replanning %.2fs vs every-period "
               "replanning %.2fs",
               wall_half, wall_every));

    // 4 is reported after 7 and 8 so it covers every simulated run above.
    report(4, tracker.runs > 0 && tracker.min_inventory >= 0.0,
           fmt("smallest final inventory entry across %ld simulated runs: %.6g (must be >= 0)",
               tracker.runs, tracker.min_inventory));

    // 9: one sweep, three executions (serial twice, then four workers); every
    // row must match bit for bit. Wall clock is excluded from the comparison:
    // it is measurement, not output.
    ExperimentConfig sweep;
    sweep.gammas = {GammaSpec{10, 5, 3.0}};
    sweep.horizons = {250, 750};
    sweep.alphas = {0.0, 0.5};
    sweep.instances_per_gamma = 2;
    sweep.runs_per_instance = 3;
    sweep.master_seed = 7;
    auto rows_a = run_experiment(sweep);
    auto rows_b = run_experiment(sweep);
    sweep.parallel = 4;
    auto rows_c = run_experiment(sweep);
    bool identical = rows_a.size() == rows_b.size() && rows_a.size() == rows_c.size();
    if (identical) {
        for (std::size_t i = 0; i < rows_a.size(); ++i) {
            identical = identical && rows_identical(rows_a[i], rows_b[i]) &&
                        rows_identical(rows_a[i], rows_c[i]);
        }
    }
    report(9, identical,
           fmt("%zu metric rows compared across serial rerun and 4-worker rerun, bit "
               "identical (wall clock excluded)",
               rows_a.size()));

    std::printf("%s\n", g_all_pass ? "all criteria passed" : "SOME CRITERIA FAILED");
    return g_all_pass ? 0 : 1;
}
