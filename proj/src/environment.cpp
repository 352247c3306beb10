#include "mnlb/environment.hpp"

#include <algorithm>
#include <ostream>

#include "mnlb/errors.hpp"

namespace mnlb {

SimState init_state(const ProblemInstance& inst) {
    inst.validate();
    SimState state;
    state.inventory.resize(static_cast<std::size_t>(inst.n_resources));
    state.depletion_floor.resize(static_cast<std::size_t>(inst.n_resources));
    for (int k = 0; k < inst.n_resources; ++k) {
        state.inventory[static_cast<std::size_t>(k)] =
            static_cast<double>(inst.horizon) * inst.capacity_rate[static_cast<std::size_t>(k)];
        double worst = 0.0;
        for (int i = 1; i <= inst.n_products; ++i) worst = std::max(worst, inst.cons(i, k));
        state.depletion_floor[static_cast<std::size_t>(k)] = worst;
    }
    for (int k = 0; k < inst.n_resources; ++k) {
        if (state.inventory[static_cast<std::size_t>(k)] <
            state.depletion_floor[static_cast<std::size_t>(k)]) {
            state.stopped = true;
        }
    }
    return state;
}

int offer(SimState& state, const Assortment& s, const ProblemInstance& inst,
          std::mt19937_64& gen) {
    if (state.stopped) {
        throw LifecycleError("cannot offer after the market stopped");
    }
    if (state.period >= inst.horizon) {
        throw LifecycleError("horizon exhausted");
    }
    if (s.max_index() > inst.n_products) {
        throw InvalidInputError("assortment references a product beyond the catalog");
    }

    if (state.last_assortment.has_value() && *state.last_assortment != s) {
        ++state.switches;
    }
    state.last_assortment = s;
    ++state.period;

    int purchase = sample_purchase(s, inst.true_pref, gen);
    state.log.append(state.period, s, purchase);
    if (purchase != 0) {
        state.cum_revenue += inst.rev(purchase);
        for (int k = 0; k < inst.n_resources; ++k) {
            state.inventory[static_cast<std::size_t>(k)] -= inst.cons(purchase, k);
        }
    }
    for (int k = 0; k < inst.n_resources; ++k) {
        if (state.inventory[static_cast<std::size_t>(k)] <
            state.depletion_floor[static_cast<std::size_t>(k)]) {
            state.stopped = true;
        }
    }
    return purchase;
}

void write_history(const SalesHistory& history, std::ostream& os) {
    for (const SaleRecord& rec : history.records()) {
        os << rec.period << ",";
        const auto& items = rec.assortment.items();
        for (std::size_t j = 0; j < items.size(); ++j) {
            if (j > 0) os << ",";
            os << items[j];
        }
        os << "," << rec.purchase << "\n";
    }
}

}  // namespace mnlb
