#include "mnlb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mnlb/errors.hpp"
#include "mnlb/lp.hpp"
#include "mnlb/rng.hpp"

namespace mnlb {

const char* const kMetricsHeader =
    "gamma,horizon,alpha,instance,run,revenue,benchmark,ratio,regret,switches,epochs,"
    "wall_clock_ms,depletion_period,aggregate,error";

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_number_label(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    return format_double(v);
}

void check_gamma(const GammaSpec& g) {
    if (g.n_products < 1 || g.n_resources < 0 || !(g.utility_bound >= 1.0)) {
        throw InvalidInputError("grid point must have N >= 1, K >= 0, R >= 1");
    }
}

}  // namespace

std::string GammaSpec::label() const {
    return std::to_string(n_products) + "-" + std::to_string(n_resources) + "-" +
           format_number_label(utility_bound);
}

ProblemInstance generate_instance(const GammaSpec& gamma, std::uint64_t seed) {
    check_gamma(gamma);
    std::mt19937_64 gen(seed);
    ProblemInstance inst;
    inst.n_products = gamma.n_products;
    inst.n_resources = gamma.n_resources;
    inst.utility_bound = gamma.utility_bound;
    inst.horizon = 1;

    inst.revenue.resize(static_cast<std::size_t>(gamma.n_products));
    for (double& r : inst.revenue) r = uniform01(gen);
    inst.consumption.resize(static_cast<std::size_t>(gamma.n_products) * gamma.n_resources);
    for (double& a : inst.consumption) a = uniform01(gen);
    inst.capacity_rate.resize(static_cast<std::size_t>(gamma.n_resources));
    for (double& c : inst.capacity_rate) c = 0.25 + 0.5 * uniform01(gen);

    const double log_r = std::log(gamma.utility_bound);
    std::vector<double> v(static_cast<std::size_t>(gamma.n_products));
    for (double& vi : v) {
        double theta = -log_r + 2.0 * log_r * uniform01(gen);
        vi = std::clamp(std::exp(theta), 1.0 / gamma.utility_bound, gamma.utility_bound);
    }
    inst.true_pref = PreferenceVector(std::move(v));
    inst.validate();
    return inst;
}

namespace {

struct Cell {
    std::size_t gamma_idx;
    int instance;
    long horizon;
    double alpha;
    int run;
    std::size_t row_slot;
};

std::uint64_t alpha_bits(double alpha) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(alpha));
    std::memcpy(&bits, &alpha, sizeof(bits));
    return bits;
}

MetricsRow run_cell(const ExperimentConfig& cfg, const GammaSpec& gamma,
                    const ProblemInstance& proto, double fluid_opt, const Cell& cell) {
    MetricsRow row;
    row.gamma = gamma.label();
    row.horizon = cell.horizon;
    row.alpha = cell.alpha;
    row.instance = cell.instance;
    row.run = cell.run;

    ProblemInstance inst = proto;
    inst.horizon = cell.horizon;
    row.benchmark = static_cast<double>(cell.horizon) * fluid_opt;

    PolicyConfig pc;
    pc.alpha = cell.alpha;
    pc.delta = cfg.delta;
    pc.conf_enabled = cfg.conf_enabled;
    pc.seed = derive_seed({cfg.master_seed, 2, cell.gamma_idx,
                           static_cast<std::uint64_t>(cell.instance),
                           static_cast<std::uint64_t>(cell.horizon), alpha_bits(cell.alpha),
                           static_cast<std::uint64_t>(cell.run)});
    try {
        auto t0 = std::chrono::steady_clock::now();
        SimResult res = run_policy(inst, pc);
        auto t1 = std::chrono::steady_clock::now();
        row.wall_clock_ms =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
                .count();
        row.revenue = res.state.cum_revenue;
        row.ratio = row.benchmark > 0.0 ? row.revenue / row.benchmark : 0.0;
        row.regret = row.benchmark - row.revenue;
        row.switches = static_cast<double>(res.state.switches);
        row.epochs = static_cast<double>(res.epochs.size());
        row.depletion_period = res.depletion_period;
    } catch (const std::exception& e) {
        row.error = e.what();
        row.regret = row.benchmark;
    }
    return row;
}

}  // namespace

std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.gammas.empty() || cfg.horizons.empty() || cfg.alphas.empty()) {
        throw InvalidInputError("sweep needs at least one grid point, horizon and alpha");
    }
    if (cfg.instances_per_gamma < 1 || cfg.runs_per_instance < 1) {
        throw InvalidInputError("instance and run counts must be positive");
    }
    for (const GammaSpec& g : cfg.gammas) check_gamma(g);
    for (double alpha : cfg.alphas) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) {
            throw InvalidInputError("alpha must lie in [0,1]");
        }
    }
    std::vector<long> horizons = cfg.horizons;
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
    if (horizons.front() < 2) throw InvalidInputError("horizons must be at least 2");

    // Instances and their fluid optima are precomputed sequentially so the
    // sweep's numbers never depend on worker scheduling.
    std::vector<std::vector<ProblemInstance>> instances(cfg.gammas.size());
    std::vector<std::vector<double>> fluid_opt(cfg.gammas.size());
    for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
        instances[g].reserve(static_cast<std::size_t>(cfg.instances_per_gamma));
        fluid_opt[g].reserve(static_cast<std::size_t>(cfg.instances_per_gamma));
        for (int i = 0; i < cfg.instances_per_gamma; ++i) {
            std::uint64_t seed =
                derive_seed({cfg.master_seed, 1, g, static_cast<std::uint64_t>(i)});
            instances[g].push_back(generate_instance(cfg.gammas[g], seed));
            fluid_opt[g].push_back(fluid_benchmark(instances[g].back()));
        }
    }

    std::vector<Cell> cells;
    for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
        for (int i = 0; i < cfg.instances_per_gamma; ++i) {
            for (long t : horizons) {
                for (double a : cfg.alphas) {
                    for (int r = 0; r < cfg.runs_per_instance; ++r) {
                        cells.push_back({g, i, t, a, r, cells.size()});
                    }
                }
            }
        }
    }

    std::vector<MetricsRow> rows(cells.size());
    int workers = std::max(1, cfg.parallel);
    if (workers == 1) {
        for (const Cell& cell : cells) {
            rows[cell.row_slot] = run_cell(cfg, cfg.gammas[cell.gamma_idx],
                                           instances[cell.gamma_idx][cell.instance],
                                           fluid_opt[cell.gamma_idx][cell.instance], cell);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                std::size_t idx = next.fetch_add(1);
                if (idx >= cells.size()) return;
                const Cell& cell = cells[idx];
                rows[cell.row_slot] = run_cell(cfg, cfg.gammas[cell.gamma_idx],
                                               instances[cell.gamma_idx][cell.instance],
                                               fluid_opt[cell.gamma_idx][cell.instance], cell);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Aggregate means per (gamma, horizon, alpha) over runs that succeeded.
    for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
        for (long t : horizons) {
            for (double a : cfg.alphas) {
                MetricsRow agg;
                agg.gamma = cfg.gammas[g].label();
                agg.horizon = t;
                agg.alpha = a;
                agg.aggregate = true;
                long count = 0;
                for (const MetricsRow& row : rows) {
                    if (row.aggregate || row.gamma != agg.gamma || row.horizon != t ||
                        row.alpha != a || !row.error.empty()) {
                        continue;
                    }
                    agg.revenue += row.revenue;
                    agg.benchmark += row.benchmark;
                    agg.ratio += row.ratio;
                    agg.regret += row.regret;
                    agg.switches += row.switches;
                    agg.epochs += row.epochs;
                    agg.wall_clock_ms += row.wall_clock_ms;
                    ++count;
                }
                if (count == 0) {
                    agg.error = "all runs failed";
                } else {
                    double c = static_cast<double>(count);
                    agg.revenue /= c;
                    agg.benchmark /= c;
                    agg.ratio /= c;
                    agg.regret /= c;
                    agg.switches /= c;
                    agg.epochs /= c;
                    agg.wall_clock_ms /= c;
                }
                rows.push_back(std::move(agg));
            }
        }
    }
    return rows;
}

namespace {

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_field(const std::string& s) {
    if (!needs_quoting(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_csv(const std::vector<MetricsRow>& rows, std::ostream& os) {
    os << kMetricsHeader << "\n";
    for (const MetricsRow& r : rows) {
        os << csv_field(r.gamma) << "," << r.horizon << "," << format_double(r.alpha) << ","
           << r.instance << "," << r.run << "," << format_double(r.revenue) << ","
           << format_double(r.benchmark) << "," << format_double(r.ratio) << ","
           << format_double(r.regret) << "," << format_double(r.switches) << ","
           << format_double(r.epochs) << "," << format_double(r.wall_clock_ms) << ","
           << r.depletion_period << "," << (r.aggregate ? 1 : 0) << "," << csv_field(r.error)
           << "\n";
    }
}

std::vector<MetricsRow> read_csv(std::istream& is) {
    std::vector<MetricsRow> rows;
    std::string line;
    if (!std::getline(is, line)) return rows;
    if (line != kMetricsHeader) throw InvalidInputError("unrecognized results header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 15) throw InvalidInputError("malformed results row");
        MetricsRow r;
        r.gamma = f[0];
        r.horizon = std::stol(f[1]);
        r.alpha = std::strtod(f[2].c_str(), nullptr);
        r.instance = std::stoi(f[3]);
        r.run = std::stoi(f[4]);
        r.revenue = std::strtod(f[5].c_str(), nullptr);
        r.benchmark = std::strtod(f[6].c_str(), nullptr);
        r.ratio = std::strtod(f[7].c_str(), nullptr);
        r.regret = std::strtod(f[8].c_str(), nullptr);
        r.switches = std::strtod(f[9].c_str(), nullptr);
        r.epochs = std::strtod(f[10].c_str(), nullptr);
        r.wall_clock_ms = std::strtod(f[11].c_str(), nullptr);
        r.depletion_period = std::stol(f[12]);
        r.aggregate = f[13] == "1";
        r.error = f[14];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_json(const std::vector<MetricsRow>& rows, std::ostream& os) {
    nlohmann::json arr = nlohmann::json::array();
    for (const MetricsRow& r : rows) {
        arr.push_back({{"gamma", r.gamma},
                       {"horizon", r.horizon},
                       {"alpha", r.alpha},
                       {"instance", r.instance},
                       {"run", r.run},
                       {"revenue", r.revenue},
                       {"benchmark", r.benchmark},
                       {"ratio", r.ratio},
                       {"regret", r.regret},
                       {"switches", r.switches},
                       {"epochs", r.epochs},
                       {"wall_clock_ms", r.wall_clock_ms},
                       {"depletion_period", r.depletion_period},
                       {"aggregate", r.aggregate},
                       {"error", r.error}});
    }
    os << arr.dump(2) << "\n";
}

void emit_results(const std::vector<MetricsRow>& rows, const std::string& path,
                  const std::string& format) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot open output path: " + path);
    if (format == "csv") {
        write_csv(rows, out);
    } else if (format == "json") {
        write_json(rows, out);
    } else {
        throw InvalidInputError("format must be csv or json");
    }
    if (!out.good()) throw InvalidInputError("failed writing results to " + path);
}

bool rows_identical(const MetricsRow& a, const MetricsRow& b, bool ignore_wall_clock) {
    bool same = a.gamma == b.gamma && a.horizon == b.horizon && a.alpha == b.alpha &&
                a.instance == b.instance && a.run == b.run && a.revenue == b.revenue &&
                a.benchmark == b.benchmark && a.ratio == b.ratio && a.regret == b.regret &&
                a.switches == b.switches && a.epochs == b.epochs &&
                a.depletion_period == b.depletion_period && a.aggregate == b.aggregate &&
                a.error == b.error;
    if (!ignore_wall_clock) same = same && a.wall_clock_ms == b.wall_clock_ms;
    return same;
}

}  // namespace mnlb
