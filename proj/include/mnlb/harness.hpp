#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mnlb/mnl.hpp"
#include "mnlb/policy.hpp"

namespace mnlb {

// One point of the difficulty grid: catalog size, resource count and the
// utility spread bound.
struct GammaSpec {
    int n_products = 0;
    int n_resources = 0;
    double utility_bound = 1.0;

    std::string label() const;  // "N-K-R", e.g. "10-5-3"
};

struct ExperimentConfig {
    std::vector<GammaSpec> gammas;
    std::vector<long> horizons;
    std::vector<double> alphas;
    int instances_per_gamma = 5;
    int runs_per_instance = 10;
    std::uint64_t master_seed = 1;
    double delta = 0.05;
    bool conf_enabled = false;
    int parallel = 1;
};

// One sweep cell result, or the aggregate over a (gamma, horizon, alpha)
// group when aggregate is set (instance and run are -1 there, and the mean
// revenue/benchmark/ratio/regret/switches/epochs/wall_clock are reported
// with depletion_period fixed at -1).
struct MetricsRow {
    std::string gamma;
    long horizon = 0;
    double alpha = 0.0;
    int instance = -1;
    int run = -1;
    double revenue = 0.0;
    double benchmark = 0.0;
    double ratio = 0.0;
    double regret = 0.0;
    double switches = 0.0;
    double epochs = 0.0;
    double wall_clock_ms = 0.0;
    long depletion_period = -1;
    bool aggregate = false;
    std::string error;
};

// Documented CSV column order, also the JSON field names.
extern const char* const kMetricsHeader;

// Deterministic random market for a grid point: revenues and consumption
// uniform on [0,1], capacity rates uniform on [0.25, 0.75], preference
// weights log-uniform on [1/R, R]. All draws come from one mt19937_64 seeded
// with the given seed (order: revenues, consumption row-major, capacities,
// preferences). The horizon is set to 1 and overridden per sweep cell.
ProblemInstance generate_instance(const GammaSpec& gamma, std::uint64_t seed);

// Full sweep: per (gamma, instance, horizon, alpha, run) runs the policy,
// computes revenue against the fluid benchmark, and appends per-group
// aggregate rows. Per-run failures are recorded in the row's error field and
// the sweep continues. Row order is fixed: runs in loop order (gamma,
// instance, horizon, alpha, run), then aggregates in (gamma, horizon, alpha)
// order. Worker parallelism never changes results or their order.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg);

void write_csv(const std::vector<MetricsRow>& rows, std::ostream& os);
void write_json(const std::vector<MetricsRow>& rows, std::ostream& os);
std::vector<MetricsRow> read_csv(std::istream& is);

// Writes rows to the given path; format is "csv" or "json".
void emit_results(const std::vector<MetricsRow>& rows, const std::string& path,
                  const std::string& format);

bool rows_identical(const MetricsRow& a, const MetricsRow& b, bool ignore_wall_clock = true);

}  // namespace mnlb
