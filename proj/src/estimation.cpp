#include "mnlb/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mnlb {

void SalesHistory::append(long period, Assortment assortment, int purchase) {
    if (!records_.empty() && period <= records_.back().period) {
        throw InvalidInputError("history periods must be strictly increasing");
    }
    if (purchase != 0 && !assortment.contains(purchase)) {
        throw InvalidInputError("purchase of a product that was not offered");
    }
    records_.push_back({period, std::move(assortment), purchase});
}

ExposureCounts exposure_counts(const SalesHistory& history, int n_products) {
    if (n_products < 1) throw InvalidInputError("need at least one product");
    ExposureCounts out;
    out.counts.assign(static_cast<std::size_t>(n_products), 0);
    for (const SaleRecord& rec : history.records()) {
        if (rec.assortment.max_index() > n_products) {
            throw InvalidInputError("history references a product beyond the catalog");
        }
        for (int i : rec.assortment.items()) {
            ++out.counts[static_cast<std::size_t>(i) - 1];
        }
    }
    return out;
}

GroupedHistory::GroupedHistory(int n_products) : n_products_(n_products) {
    if (n_products < 1) throw InvalidInputError("need at least one product");
}

void GroupedHistory::add(const Assortment& assortment, int purchase) {
    if (assortment.max_index() > n_products_) {
        throw InvalidInputError("assortment references a product beyond the catalog");
    }
    if (purchase != 0 && !assortment.contains(purchase)) {
        throw InvalidInputError("purchase of a product that was not offered");
    }
    auto it = index_.find(assortment);
    if (it == index_.end()) {
        it = index_.emplace(assortment, groups_.size()).first;
        AssortmentStats stats;
        stats.assortment = assortment;
        stats.purchases.assign(assortment.size(), 0);
        groups_.push_back(std::move(stats));
    }
    AssortmentStats& g = groups_[it->second];
    ++g.offers;
    if (purchase == 0) {
        ++g.outside;
    } else {
        const auto& items = g.assortment.items();
        auto pos = std::lower_bound(items.begin(), items.end(), purchase);
        ++g.purchases[static_cast<std::size_t>(pos - items.begin())];
    }
    ++total_;
}

void GroupedHistory::absorb(const SalesHistory& history, std::size_t from) {
    const auto& recs = history.records();
    for (std::size_t t = from; t < recs.size(); ++t) {
        add(recs[t].assortment, recs[t].purchase);
    }
}

std::vector<long> GroupedHistory::exposure_totals() const {
    std::vector<long> n(static_cast<std::size_t>(n_products_), 0);
    for (const AssortmentStats& g : groups_) {
        for (int i : g.assortment.items()) {
            n[static_cast<std::size_t>(i) - 1] += g.offers;
        }
    }
    return n;
}

namespace {

void check_theta(const std::vector<double>& theta) {
    for (double t : theta) {
        if (!std::isfinite(t)) throw InvalidInputError("log-weights must be finite");
    }
}

// log(1 + sum exp(theta_j over members)), shifted for stability.
double log_denom(const AssortmentStats& g, const std::vector<double>& theta) {
    double m = 0.0;
    for (int i : g.assortment.items()) {
        m = std::max(m, theta[static_cast<std::size_t>(i) - 1]);
    }
    double acc = std::exp(-m);
    for (int i : g.assortment.items()) {
        acc += std::exp(theta[static_cast<std::size_t>(i) - 1] - m);
    }
    return m + std::log(acc);
}

GroupedHistory group_for(const SalesHistory& history, int n_products) {
    GroupedHistory grouped(n_products);
    grouped.absorb(history);
    return grouped;
}

int infer_products(const SalesHistory& history, const std::vector<double>& theta) {
    int n = static_cast<int>(theta.size());
    for (const SaleRecord& rec : history.records()) {
        if (rec.assortment.max_index() > n) {
            throw InvalidInputError("history references a product beyond theta's range");
        }
    }
    return n;
}

}  // namespace

double grouped_nll(const GroupedHistory& grouped, const std::vector<double>& theta) {
    if (theta.size() != static_cast<std::size_t>(grouped.n_products())) {
        throw InvalidInputError("theta size mismatch");
    }
    check_theta(theta);
    double total = 0.0;
    for (const AssortmentStats& g : grouped.groups()) {
        double lse = log_denom(g, theta);
        total += static_cast<double>(g.offers) * lse;
        const auto& items = g.assortment.items();
        for (std::size_t j = 0; j < items.size(); ++j) {
            total -= static_cast<double>(g.purchases[j]) *
                     theta[static_cast<std::size_t>(items[j]) - 1];
        }
    }
    return total;
}

void grouped_nll_gradient(const GroupedHistory& grouped, const std::vector<double>& theta,
                          std::vector<double>& grad) {
    if (theta.size() != static_cast<std::size_t>(grouped.n_products())) {
        throw InvalidInputError("theta size mismatch");
    }
    check_theta(theta);
    grad.assign(theta.size(), 0.0);
    for (const AssortmentStats& g : grouped.groups()) {
        double lse = log_denom(g, theta);
        const auto& items = g.assortment.items();
        for (std::size_t j = 0; j < items.size(); ++j) {
            std::size_t idx = static_cast<std::size_t>(items[j]) - 1;
            double phi = std::exp(theta[idx] - lse);
            grad[idx] += static_cast<double>(g.offers) * phi -
                         static_cast<double>(g.purchases[j]);
        }
    }
}

void grouped_nll_hessian(const GroupedHistory& grouped, const std::vector<double>& theta,
                         Eigen::MatrixXd& hess) {
    if (theta.size() != static_cast<std::size_t>(grouped.n_products())) {
        throw InvalidInputError("theta size mismatch");
    }
    check_theta(theta);
    const auto n = static_cast<Eigen::Index>(theta.size());
    hess.setZero(n, n);
    std::vector<double> phi;
    for (const AssortmentStats& g : grouped.groups()) {
        double lse = log_denom(g, theta);
        const auto& items = g.assortment.items();
        phi.resize(items.size());
        for (std::size_t j = 0; j < items.size(); ++j) {
            phi[j] = std::exp(theta[static_cast<std::size_t>(items[j]) - 1] - lse);
        }
        double o = static_cast<double>(g.offers);
        for (std::size_t a = 0; a < items.size(); ++a) {
            Eigen::Index ia = items[a] - 1;
            hess(ia, ia) += o * phi[a] * (1.0 - phi[a]);
            for (std::size_t b = a + 1; b < items.size(); ++b) {
                Eigen::Index ib = items[b] - 1;
                double off = -o * phi[a] * phi[b];
                hess(ia, ib) += off;
                hess(ib, ia) += off;
            }
        }
    }
}

double neg_log_likelihood(const SalesHistory& history, const std::vector<double>& theta) {
    int n = infer_products(history, theta);
    return grouped_nll(group_for(history, std::max(n, 1)), theta);
}

std::vector<double> nll_gradient(const SalesHistory& history, const std::vector<double>& theta) {
    int n = infer_products(history, theta);
    std::vector<double> grad;
    grouped_nll_gradient(group_for(history, std::max(n, 1)), theta, grad);
    return grad;
}

Eigen::MatrixXd nll_hessian(const SalesHistory& history, const std::vector<double>& theta) {
    int n = infer_products(history, theta);
    Eigen::MatrixXd hess;
    grouped_nll_hessian(group_for(history, std::max(n, 1)), theta, hess);
    return hess;
}

namespace {

void clamp_box(std::vector<double>& theta, double bound) {
    for (double& t : theta) t = std::clamp(t, -bound, bound);
}

double projected_step_norm(const std::vector<double>& theta, const std::vector<double>& grad,
                           double bound) {
    double worst = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double moved = std::clamp(theta[i] - grad[i], -bound, bound);
        worst = std::max(worst, std::abs(theta[i] - moved));
    }
    return worst;
}

// Backtracking line search along the projected arc theta -> clamp(theta + a*d).
// Returns true when a step was accepted.  A predicted decrease below the
// floating-point resolution of f cannot be verified by comparing objective
// values; in that regime the (descent) step is taken as-is and the gradient
// test at the top of the outer loop decides termination.  Without this the
// quadratic tail stalls several digits short of the gradient tolerance.
bool armijo_accept(const GroupedHistory& grouped, double bound, std::vector<double>& theta,
                   double& f, const std::vector<double>& grad, const std::vector<double>& dir) {
    constexpr double kSlope = 1e-4;
    const double f_resolution =
        4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
    double alpha = 1.0;
    std::vector<double> trial(theta.size());
    for (int halvings = 0; halvings < 45; ++halvings) {
        double slope = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            trial[i] = std::clamp(theta[i] + alpha * dir[i], -bound, bound);
            slope += grad[i] * (trial[i] - theta[i]);
        }
        if (slope < 0.0) {
            double f_trial = grouped_nll(grouped, trial);
            if (f_trial <= f + kSlope * slope || -slope <= f_resolution) {
                theta = trial;
                f = f_trial;
                return true;
            }
        }
        alpha *= 0.5;
    }
    return false;
}

// Newton direction restricted to the free coordinates.  Coordinates pinned at a
// box face with the gradient pushing outward stay put; solving the full system
// and clamping instead would cancel most of the step and stall the iteration on
// the face.  Returns false when no usable direction exists.
bool reduced_newton_direction(const Eigen::MatrixXd& hess, const std::vector<double>& grad,
                              const std::vector<double>& theta, double bound,
                              std::vector<double>& dir) {
    const double edge = 1e-12;
    std::vector<Eigen::Index> free_idx;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        bool at_lower = theta[i] <= -bound + edge;
        bool at_upper = theta[i] >= bound - edge;
        bool pinned = (at_lower && grad[i] > 0.0) || (at_upper && grad[i] < 0.0);
        if (!pinned) free_idx.push_back(static_cast<Eigen::Index>(i));
    }
    std::fill(dir.begin(), dir.end(), 0.0);
    if (free_idx.empty()) return false;

    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    Eigen::MatrixXd hf(nf, nf);
    Eigen::VectorXd gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = grad[static_cast<std::size_t>(free_idx[static_cast<std::size_t>(a)])];
        for (Eigen::Index b = 0; b < nf; ++b) {
            hf(a, b) = hess(free_idx[static_cast<std::size_t>(a)],
                            free_idx[static_cast<std::size_t>(b)]);
        }
    }
    hf.diagonal().array() += 1e-8;
    Eigen::VectorXd step = hf.ldlt().solve(-gf);
    if (!step.allFinite()) return false;
    for (Eigen::Index a = 0; a < nf; ++a) {
        dir[static_cast<std::size_t>(free_idx[static_cast<std::size_t>(a)])] = step[a];
    }
    return true;
}

}  // namespace

MleResult fit_mle(const SalesHistory& history, int n_products, double utility_bound,
                  const MleOptions& options) {
    GroupedHistory grouped(n_products);
    grouped.absorb(history);
    return fit_mle(grouped, utility_bound, options);
}

MleResult fit_mle(const GroupedHistory& grouped, double utility_bound, const MleOptions& options,
                  const std::vector<double>* warm_theta) {
    if (!(utility_bound >= 1.0) || !std::isfinite(utility_bound)) {
        throw InvalidInputError("utility bound must be finite and >= 1");
    }
    if (grouped.total_records() == 0) {
        throw EstimationUndefinedError("cannot fit on an empty history");
    }
    std::vector<long> exposure = grouped.exposure_totals();
    for (std::size_t i = 0; i < exposure.size(); ++i) {
        if (exposure[i] == 0) {
            throw EstimationUndefinedError("product " + std::to_string(i + 1) +
                                           " was never offered; its weight is unidentified");
        }
    }

    const double bound = std::log(utility_bound);
    const auto n = static_cast<std::size_t>(grouped.n_products());
    std::vector<double> theta(n, 0.0);
    if (warm_theta != nullptr) {
        if (warm_theta->size() != n) throw InvalidInputError("warm start size mismatch");
        theta = *warm_theta;
        clamp_box(theta, bound);
    }

    MleResult result;
    double f = grouped_nll(grouped, theta);
    std::vector<double> grad(n), dir(n);
    Eigen::MatrixXd hess;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        grouped_nll_gradient(grouped, theta, grad);
        result.projected_gradient_norm = projected_step_norm(theta, grad, bound);
        if (result.projected_gradient_norm <= options.tolerance) {
            result.converged = true;
            break;
        }

        grouped_nll_hessian(grouped, theta, hess);
        bool newton_ok = reduced_newton_direction(hess, grad, theta, bound, dir);
        if (newton_ok) {
            newton_ok = armijo_accept(grouped, bound, theta, f, grad, dir);
        }
        if (!newton_ok) {
            for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
            if (!armijo_accept(grouped, bound, theta, f, grad, dir)) {
                break;  // no measurable progress in either direction
            }
        }
    }
    result.iterations = iter;
    if (!result.converged) {
        grouped_nll_gradient(grouped, theta, grad);
        result.projected_gradient_norm = projected_step_norm(theta, grad, bound);
        result.converged = result.projected_gradient_norm <= options.tolerance;
    }

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(theta[i]);
    result.preferences = PreferenceVector(std::move(v));
    result.theta = std::move(theta);
    return result;
}

double compute_psi(double utility_bound, int n_products, long horizon, long lp_budget,
                   int n_resources, double delta, bool fold_resources_into_log) {
    if (!(utility_bound >= 1.0)) throw InvalidInputError("utility bound must be >= 1");
    if (n_products < 1 || horizon < 1 || lp_budget < 1 || n_resources < 0) {
        throw InvalidInputError("deviation scale needs positive sizes");
    }
    if (!(delta > 0.0)) throw InvalidInputError("delta must be positive");
    const double r = utility_bound;
    const double n = static_cast<double>(n_products);
    double lead = r * (1.0 + n * r) * (1.0 + n * r) / 2.0;
    double arg = 2.0 * std::sqrt(static_cast<double>(horizon)) *
                 static_cast<double>(lp_budget) * n / delta;
    if (fold_resources_into_log) arg *= static_cast<double>(n_resources + 1);
    double radicand = 2.0 + 4.0 * std::log(arg);
    if (radicand < 0.0) {
        throw InvalidInputError("deviation scale undefined for these parameters");
    }
    return lead * std::sqrt(radicand);
}

double confidence_radius(long n_observations, double psi, int n_products) {
    if (n_products < 1) throw InvalidInputError("need at least one product");
    if (!(psi >= 0.0)) throw InvalidInputError("deviation scale must be nonnegative");
    if (n_observations < 1) {
        throw UndefinedRadiusError("confidence radius needs at least one observation");
    }
    return (std::sqrt(static_cast<double>(n_products)) + 1.0) * psi /
           std::sqrt(static_cast<double>(n_observations));
}

OmegaResult compute_omega(const ProblemInstance& inst, long warm_start_length, long lp_budget,
                          double psi, double delta) {
    inst.validate();
    if (warm_start_length < 1 || lp_budget < 1) {
        throw InvalidInputError("tightening needs positive warm start and budget");
    }
    if (!(delta > 0.0) || !(psi >= 0.0)) {
        throw InvalidInputError("tightening needs positive delta and nonnegative scale");
    }
    const double t = static_cast<double>(inst.horizon);
    const double n = static_cast<double>(inst.n_products);
    const double k = static_cast<double>(inst.n_resources);
    const double tau = static_cast<double>(warm_start_length);
    const double q = static_cast<double>(lp_budget);
    double min_c = *std::min_element(inst.capacity_rate.begin(), inst.capacity_rate.end());

    double tail_radicand = 2.0 * t * std::log(4.0 * (k + 1.0) / delta);
    if (tail_radicand < 0.0) throw InvalidInputError("tightening undefined for these parameters");
    double tail = std::sqrt(tail_radicand);
    double estimation = 4.0 * (std::sqrt(n) + 1.0) * std::sqrt(1.0 + n * t / (tau * q)) * psi *
                        n * std::sqrt(t);
    double coupling = (2.0 * n * n * psi / std::sqrt(tau)) * tail;

    OmegaResult out;
    out.value = (estimation + tail + coupling + tau) / (t * min_c);
    out.exceeds_one = out.value > 1.0;
    return out;
}

double ConfidenceParams::radius(long n_observations, int n_products) const {
    if (!enabled) return 0.0;
    return confidence_radius(n_observations, psi, n_products);
}

}  // namespace mnlb
