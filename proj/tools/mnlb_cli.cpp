// Experiment driver: sweeps the policy over difficulty grids, horizons and
// switch-budget exponents, then writes per-run and aggregate metrics.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mnlb/harness.hpp"

namespace {

mnlb::GammaSpec parse_gamma(const std::string& text) {
    mnlb::GammaSpec g;
    char extra;
    std::istringstream in(text);
    char c1, c2;
    if (!(in >> g.n_products >> c1 >> g.n_resources >> c2 >> g.utility_bound) || c1 != ',' ||
        c2 != ',' || (in >> extra)) {
        throw CLI::ValidationError("--gamma expects N,K,R such as 10,5,3");
    }
    return g;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Assortment bandit experiment harness"};
    app.set_config("--config", "", "Key-value config file; command line flags override it");

    std::vector<std::string> gamma_specs;
    std::vector<long> horizons = {250, 500, 750, 1000, 1500, 2000, 5000, 10000, 20000, 30000, 40000};
    std::vector<double> alphas = {0.0, 0.5, 1.0};
    mnlb::ExperimentConfig cfg;
    std::string out_path = "results.csv";
    std::string format = "csv";

    app.add_option("--gamma", gamma_specs,
                   "Grid point N,K,R; repeat the flag for several (default 10,5,3)");
    app.add_option("--horizons", horizons, "Horizon values T")->delimiter(',');
    app.add_option("--alphas", alphas, "Switch budget exponents in [0,1]")->delimiter(',');
    app.add_option("--instances", cfg.instances_per_gamma, "Random markets per grid point")
        ->capture_default_str();
    app.add_option("--runs", cfg.runs_per_instance, "Policy runs per market")
        ->capture_default_str();
    app.add_option("--seed", cfg.master_seed, "Master seed")->capture_default_str();
    app.add_option("--delta", cfg.delta, "Confidence level")->capture_default_str();
    app.add_flag("--conf-enabled", cfg.conf_enabled,
                 "Apply confidence widening and capacity tightening in planning");
    app.add_option("--out", out_path, "Output path")->capture_default_str();
    app.add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--parallel", cfg.parallel, "Worker threads")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gamma_specs.empty()) {
            cfg.gammas.push_back({10, 5, 3.0});
        } else {
            for (const auto& s : gamma_specs) cfg.gammas.push_back(parse_gamma(s));
        }
        cfg.horizons = horizons;
        cfg.alphas = alphas;

        std::vector<mnlb::MetricsRow> rows = mnlb::run_experiment(cfg);
        mnlb::emit_results(rows, out_path, format);

        int failed = 0;
        for (const auto& row : rows) {
            if (!row.error.empty() && !row.aggregate) {
                ++failed;
                std::cerr << "failed: " << row.gamma << " T=" << row.horizon
                          << " alpha=" << row.alpha << " instance=" << row.instance
                          << " run=" << row.run << ": " << row.error << "\n";
            }
        }
        std::cerr << "wrote " << rows.size() << " rows to " << out_path << "\n";
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
