#include "mnlb/mnl.hpp"

#include <algorithm>
#include <cmath>

#include "mnlb/rng.hpp"

namespace mnlb {

Assortment::Assortment(std::vector<int> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
    if (!items_.empty() && items_.front() < 1) {
        throw InvalidInputError("assortment contains a product index below 1");
    }
}

bool Assortment::contains(int product) const {
    return std::binary_search(items_.begin(), items_.end(), product);
}

PreferenceVector::PreferenceVector(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidInputError("preference weights must be finite and positive");
        }
    }
}

double PreferenceVector::value(int product) const {
    if (product < 1 || product > size()) {
        throw InvalidInputError("product index out of range");
    }
    return values_[static_cast<std::size_t>(product) - 1];
}

void ProblemInstance::validate() const {
    if (n_products < 1) throw InvalidInputError("instance needs at least one product");
    if (n_resources < 0) throw InvalidInputError("negative resource count");
    if (revenue.size() != static_cast<std::size_t>(n_products)) {
        throw InvalidInputError("revenue size mismatch");
    }
    if (consumption.size() != static_cast<std::size_t>(n_products) * n_resources) {
        throw InvalidInputError("consumption size mismatch");
    }
    if (capacity_rate.size() != static_cast<std::size_t>(n_resources)) {
        throw InvalidInputError("capacity size mismatch");
    }
    if (horizon < 1) throw InvalidInputError("horizon must be positive");
    if (!(utility_bound >= 1.0)) throw InvalidInputError("utility bound must be >= 1");
    for (double r : revenue) {
        if (!std::isfinite(r) || r < 0.0 || r > 1.0) {
            throw InvalidInputError("revenue entries must lie in [0,1]");
        }
    }
    for (double a : consumption) {
        if (!std::isfinite(a) || a < 0.0 || a > 1.0) {
            throw InvalidInputError("consumption entries must lie in [0,1]");
        }
    }
    for (double c : capacity_rate) {
        if (!std::isfinite(c) || !(c > 0.0)) {
            throw InvalidInputError("capacity rates must be positive");
        }
    }
    if (true_pref.size() != n_products) {
        throw InvalidInputError("preference vector size mismatch");
    }
    for (double v : true_pref.values()) {
        if (v < 1.0 / utility_bound - 1e-12 || v > utility_bound + 1e-12) {
            throw InvalidInputError("preference weight outside [1/R, R]");
        }
    }
}

namespace {

void check_assortment_fits(const Assortment& s, const PreferenceVector& v) {
    if (s.max_index() > v.size()) {
        throw InvalidInputError("assortment references a product beyond the preference vector");
    }
}

}  // namespace

std::vector<double> choice_probabilities(const Assortment& s, const PreferenceVector& v) {
    check_assortment_fits(s, v);
    std::vector<double> p(static_cast<std::size_t>(v.size()) + 1, 0.0);
    double denom = 1.0 + assortment_weight(s, v);
    p[0] = 1.0 / denom;
    for (int i : s.items()) {
        p[static_cast<std::size_t>(i)] = v.value(i) / denom;
    }
    return p;
}

double assortment_weight(const Assortment& s, const PreferenceVector& v) {
    check_assortment_fits(s, v);
    double total = 0.0;
    for (int i : s.items()) total += v.value(i);
    return total;
}

double expected_revenue(const Assortment& s, const PreferenceVector& v,
                        const ProblemInstance& inst) {
    if (v.size() != inst.n_products) {
        throw InvalidInputError("preference vector size does not match instance");
    }
    check_assortment_fits(s, v);
    double denom = 1.0 + assortment_weight(s, v);
    double total = 0.0;
    for (int i : s.items()) total += inst.rev(i) * v.value(i);
    return total / denom;
}

double expected_consumption(const Assortment& s, int resource, const PreferenceVector& v,
                            const ProblemInstance& inst) {
    if (v.size() != inst.n_products) {
        throw InvalidInputError("preference vector size does not match instance");
    }
    if (resource < 0 || resource >= inst.n_resources) {
        throw InvalidInputError("resource index out of range");
    }
    check_assortment_fits(s, v);
    double denom = 1.0 + assortment_weight(s, v);
    double total = 0.0;
    for (int i : s.items()) total += inst.cons(i, resource) * v.value(i);
    return total / denom;
}

int sample_purchase(const Assortment& s, const PreferenceVector& v, std::mt19937_64& gen) {
    check_assortment_fits(s, v);
    double denom = 1.0 + assortment_weight(s, v);
    double u = uniform01(gen) * denom;
    // Inverse CDF walk in ascending product order, no-purchase mass first.
    double acc = 1.0;
    if (u < acc) return 0;
    for (int i : s.items()) {
        acc += v.value(i);
        if (u < acc) return i;
    }
    return s.items().empty() ? 0 : s.items().back();
}

}  // namespace mnlb
