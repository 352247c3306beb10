#pragma once

// Independent reference implementations for cross-checking the library.
// Deliberately written from first principles with no shared code paths:
// direct summation, probability products, finite differences, exhaustive
// searches and textbook special functions.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mnlb/environment.hpp"
#include "mnlb/estimation.hpp"
#include "mnlb/harness.hpp"
#include "mnlb/lp.hpp"
#include "mnlb/rng.hpp"

namespace oracle {

// Probability of outcome `item` (0 = none) when offering `s` under weights v.
inline double choice_prob(const std::vector<int>& s, const std::vector<double>& v, int item) {
    double denom = 1.0;
    for (int i : s) denom += v[static_cast<std::size_t>(i) - 1];
    if (item == 0) return 1.0 / denom;
    bool offered = std::find(s.begin(), s.end(), item) != s.end();
    if (!offered) return 0.0;
    return v[static_cast<std::size_t>(item) - 1] / denom;
}

inline double expected_revenue(const std::vector<int>& s, const std::vector<double>& v,
                               const std::vector<double>& revenue) {
    double total = 0.0;
    for (int i : s) total += revenue[static_cast<std::size_t>(i) - 1] * choice_prob(s, v, i);
    return total;
}

inline double expected_consumption(const std::vector<int>& s, int resource,
                                   const std::vector<double>& v,
                                   const mnlb::ProblemInstance& inst) {
    double total = 0.0;
    for (int i : s) total += inst.cons(i, resource) * choice_prob(s, v, i);
    return total;
}

// Negative log-likelihood as a product of per-record outcome probabilities.
inline double nll(const mnlb::SalesHistory& history, const std::vector<double>& theta) {
    std::vector<double> v(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) v[i] = std::exp(theta[i]);
    double total = 0.0;
    for (const auto& rec : history.records()) {
        double p = choice_prob(rec.assortment.items(), v, rec.purchase);
        total -= std::log(p);
    }
    return total;
}

template <typename F>
std::vector<double> fd_gradient(F&& f, std::vector<double> point, double h = 1e-6) {
    std::vector<double> grad(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        double saved = point[i];
        point[i] = saved + h;
        double fp = f(point);
        point[i] = saved - h;
        double fm = f(point);
        point[i] = saved;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

template <typename F>
Eigen::MatrixXd fd_jacobian(F&& f, std::vector<double> point, double h = 1e-6) {
    const auto n = static_cast<Eigen::Index>(point.size());
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double saved = point[static_cast<std::size_t>(i)];
        point[static_cast<std::size_t>(i)] = saved + h;
        std::vector<double> fp = f(point);
        point[static_cast<std::size_t>(i)] = saved - h;
        std::vector<double> fm = f(point);
        point[static_cast<std::size_t>(i)] = saved;
        for (Eigen::Index j = 0; j < n; ++j) {
            jac(j, i) = (fp[static_cast<std::size_t>(j)] - fm[static_cast<std::size_t>(j)]) /
                        (2.0 * h);
        }
    }
    return jac;
}

// Best single assortment by brute force over revenue-ordered prefixes. For an
// unconstrained choice model the optimum is one of these prefixes.
inline std::pair<double, std::vector<int>> revenue_ordered_best(
    const std::vector<double>& v, const std::vector<double>& revenue) {
    const int n = static_cast<int>(v.size());
    std::vector<int> by_revenue(static_cast<std::size_t>(n));
    std::iota(by_revenue.begin(), by_revenue.end(), 1);
    std::sort(by_revenue.begin(), by_revenue.end(), [&](int a, int b) {
        double ra = revenue[static_cast<std::size_t>(a) - 1];
        double rb = revenue[static_cast<std::size_t>(b) - 1];
        if (ra != rb) return ra > rb;
        return a < b;
    });
    double best = 0.0;
    std::vector<int> best_set;
    std::vector<int> prefix;
    for (int l = 0; l < n; ++l) {
        prefix.push_back(by_revenue[static_cast<std::size_t>(l)]);
        double val = expected_revenue(prefix, v, revenue);
        if (val > best) {
            best = val;
            best_set = prefix;
        }
    }
    std::sort(best_set.begin(), best_set.end());
    return {best, best_set};
}

// Best single assortment over ALL subsets (exponential; n <= 20).
inline std::pair<double, std::vector<int>> exhaustive_best(const std::vector<double>& v,
                                                           const std::vector<double>& revenue) {
    const int n = static_cast<int>(v.size());
    double best = 0.0;
    std::vector<int> best_set;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<int> s;
        for (int i = 1; i <= n; ++i) {
            if (mask & (std::size_t{1} << (i - 1))) s.push_back(i);
        }
        double val = expected_revenue(s, v, revenue);
        if (val > best) {
            best = val;
            best_set = s;
        }
    }
    return {best, best_set};
}

namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// Upper-tail p-value of a chi-square statistic.
inline double chi2_pvalue(double stat, int dof) {
    if (stat <= 0.0) return 1.0;
    double a = 0.5 * dof;
    double x = 0.5 * stat;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_contfrac(a, x);
}

// Widened value/consumption of a distribution evaluated atom by atom from
// first principles.
inline double dist_reward(const mnlb::AssortmentDistribution& dist, const std::vector<double>& v,
                          const std::vector<double>& radii, const std::vector<double>& revenue) {
    double total = 0.0;
    for (const auto& atom : dist.atoms) {
        double val = 0.0;
        for (int i : atom.assortment.items()) {
            val += revenue[static_cast<std::size_t>(i) - 1] *
                   (choice_prob(atom.assortment.items(), v, i) +
                    radii[static_cast<std::size_t>(i) - 1]);
        }
        total += atom.weight * val;
    }
    return total;
}

inline double dist_consumption(const mnlb::AssortmentDistribution& dist, int resource,
                               const std::vector<double>& v, const std::vector<double>& radii,
                               const mnlb::ProblemInstance& inst) {
    double total = 0.0;
    for (const auto& atom : dist.atoms) {
        double val = 0.0;
        for (int i : atom.assortment.items()) {
            val += inst.cons(i, resource) *
                   (choice_prob(atom.assortment.items(), v, i) -
                    radii[static_cast<std::size_t>(i) - 1]);
        }
        total += atom.weight * val;
    }
    return total;
}

// Random nonempty assortment over 1..n, each product kept with probability
// one half, forced nonempty by a uniform fallback pick.
inline std::vector<int> random_assortment(int n, std::mt19937_64& gen) {
    std::vector<int> s;
    for (int i = 1; i <= n; ++i) {
        if (mnlb::uniform01(gen) < 0.5) s.push_back(i);
    }
    if (s.empty()) {
        s.push_back(1 + static_cast<int>(mnlb::uniform01(gen) * n));
        if (s[0] > n) s[0] = n;
    }
    return s;
}

inline std::vector<double> random_theta(int n, double bound, std::mt19937_64& gen) {
    std::vector<double> theta(static_cast<std::size_t>(n));
    for (double& t : theta) t = -bound + 2.0 * bound * mnlb::uniform01(gen);
    return theta;
}

// History drawn from a ground-truth model over random assortments; every
// product is first exposed once via singletons so fits are well posed.
inline mnlb::SalesHistory random_history(int n, int extra_periods,
                                         const std::vector<double>& v_true,
                                         std::mt19937_64& gen) {
    mnlb::SalesHistory history;
    long period = 0;
    mnlb::PreferenceVector pref(v_true);
    for (int i = 1; i <= n; ++i) {
        mnlb::Assortment s(std::vector<int>{i});
        history.append(++period, s, mnlb::sample_purchase(s, pref, gen));
    }
    for (int t = 0; t < extra_periods; ++t) {
        mnlb::Assortment s(random_assortment(n, gen));
        history.append(++period, s, mnlb::sample_purchase(s, pref, gen));
    }
    return history;
}

}  // namespace oracle
