#pragma once

#include <iosfwd>
#include <optional>
#include <random>

#include "mnlb/estimation.hpp"
#include "mnlb/mnl.hpp"

namespace mnlb {

// Running market simulation: remaining stock, earnings, switch counter and
// the full offer log.
struct SimState {
    std::vector<double> inventory;        // remaining units per resource
    std::vector<double> depletion_floor;  // max over products of a(i,k)
    double cum_revenue = 0.0;
    long period = 0;  // offered periods so far
    std::optional<Assortment> last_assortment;
    long switches = 0;
    bool stopped = false;
    SalesHistory log;
};

// Fresh state with inventory[k] = T * c(k). The state starts stopped in the
// degenerate case where some resource cannot absorb even one worst-case sale.
SimState init_state(const ProblemInstance& inst);

// Plays one period: samples the purchase from the true preferences, logs it,
// collects revenue, draws down inventory and retires the market once any
// resource could go negative on the next worst-case sale. Returns the
// purchased product, 0 for no purchase. The first offered assortment counts
// zero switches.
int offer(SimState& state, const Assortment& s, const ProblemInstance& inst,
          std::mt19937_64& gen);

// One line per record: period, the assortment's indices, then the purchase,
// all comma-separated (empty assortment leaves the middle empty, e.g. "3,,0").
// The first and last fields are the period and purchase, so lines parse
// unambiguously.
void write_history(const SalesHistory& history, std::ostream& os);

}  // namespace mnlb
