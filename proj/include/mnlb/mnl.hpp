#pragma once

#include <compare>
#include <random>
#include <vector>

#include "mnlb/errors.hpp"

namespace mnlb {

// Index conventions used across the whole library:
//   products   1..N, with 0 reserved for the no-purchase option;
//   resources  0..K-1 (plain array indices, there is no outside resource).
// Storage is zero-based; accessors taking a product index expect 1..N.

// Set of offered products, kept sorted ascending without duplicates.
class Assortment {
  public:
    Assortment() = default;
    explicit Assortment(std::vector<int> items);

    bool contains(int product) const;
    const std::vector<int>& items() const { return items_; }
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    // Largest product index in the set, 0 when empty.
    int max_index() const { return items_.empty() ? 0 : items_.back(); }

    friend bool operator==(const Assortment&, const Assortment&) = default;
    friend auto operator<=>(const Assortment&, const Assortment&) = default;

  private:
    std::vector<int> items_;
};

// Positive attraction weights v(1..N); the no-purchase option has fixed
// weight 1 and is never stored.
class PreferenceVector {
  public:
    PreferenceVector() = default;
    explicit PreferenceVector(std::vector<double> values);

    int size() const { return static_cast<int>(values_.size()); }
    double value(int product) const;
    const std::vector<double>& values() const { return values_; }

    friend bool operator==(const PreferenceVector&, const PreferenceVector&) = default;

  private:
    std::vector<double> values_;
};

// One market: prices, per-resource consumption, capacity rates, horizon and
// the latent preference vector the simulator draws from.
struct ProblemInstance {
    int n_products = 0;                // N
    int n_resources = 0;               // K
    std::vector<double> revenue;       // size N, r(i) in [0,1]
    std::vector<double> consumption;   // size N*K row-major, a(i,k) in [0,1]
    std::vector<double> capacity_rate; // size K, c(k) > 0
    long horizon = 0;                  // T
    PreferenceVector true_pref;        // v*(i) in [1/R, R]
    double utility_bound = 1.0;        // R >= 1

    double rev(int product) const { return revenue[static_cast<std::size_t>(product) - 1]; }
    double cons(int product, int resource) const {
        return consumption[(static_cast<std::size_t>(product) - 1) * n_resources + resource];
    }
    double pref(int product) const { return true_pref.value(product); }

    void validate() const;  // throws InvalidInputError
};

// Purchase probabilities under the multinomial-logit rule: entry 0 is the
// no-purchase probability, entry i the probability of buying product i.
// Products outside S get probability zero. Size is v.size()+1.
std::vector<double> choice_probabilities(const Assortment& s, const PreferenceVector& v);

// Sum of attraction weights over the assortment.
double assortment_weight(const Assortment& s, const PreferenceVector& v);

// Per-period expected revenue of offering s when demand follows v.
double expected_revenue(const Assortment& s, const PreferenceVector& v,
                        const ProblemInstance& inst);

// Per-period expected consumption of one resource.
double expected_consumption(const Assortment& s, int resource, const PreferenceVector& v,
                            const ProblemInstance& inst);

// One customer draw: returns the purchased product index, 0 for no purchase.
int sample_purchase(const Assortment& s, const PreferenceVector& v, std::mt19937_64& gen);

}  // namespace mnlb
