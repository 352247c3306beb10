#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "mnlb/mnl.hpp"

namespace mnlb {

struct SaleRecord {
    long period = 0;
    Assortment assortment;
    int purchase = 0;  // 0 means no purchase
};

// Append-only log of (period, offered set, outcome) triples with strictly
// increasing periods.
class SalesHistory {
  public:
    void append(long period, Assortment assortment, int purchase);
    const std::vector<SaleRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

  private:
    std::vector<SaleRecord> records_;
};

// Times each product was part of an offered assortment.
struct ExposureCounts {
    std::vector<long> counts;  // size N, counts[i-1] = n_i
    long of(int product) const { return counts[static_cast<std::size_t>(product) - 1]; }
};

ExposureCounts exposure_counts(const SalesHistory& history, int n_products);

// Sales records aggregated by distinct assortment. Likelihood evaluations
// cost one pass over distinct sets instead of one pass over all periods.
struct AssortmentStats {
    Assortment assortment;
    long offers = 0;              // periods this set was shown
    long outside = 0;             // no-purchase outcomes
    std::vector<long> purchases;  // parallel to assortment.items()
};

class GroupedHistory {
  public:
    explicit GroupedHistory(int n_products);

    void add(const Assortment& assortment, int purchase);
    // Folds records [from, end) of the log into the aggregate.
    void absorb(const SalesHistory& history, std::size_t from = 0);

    int n_products() const { return n_products_; }
    long total_records() const { return total_; }
    const std::vector<AssortmentStats>& groups() const { return groups_; }
    std::vector<long> exposure_totals() const;

  private:
    int n_products_;
    long total_ = 0;
    std::vector<AssortmentStats> groups_;
    std::map<Assortment, std::size_t> index_;
};

// Negative log-likelihood of the log under log-weights theta (theta[i-1] for
// product i, no-purchase pinned at 0), plus its derivatives. The Hessian is
// positive semidefinite everywhere.
double neg_log_likelihood(const SalesHistory& history, const std::vector<double>& theta);
std::vector<double> nll_gradient(const SalesHistory& history, const std::vector<double>& theta);
Eigen::MatrixXd nll_hessian(const SalesHistory& history, const std::vector<double>& theta);

double grouped_nll(const GroupedHistory& grouped, const std::vector<double>& theta);
void grouped_nll_gradient(const GroupedHistory& grouped, const std::vector<double>& theta,
                          std::vector<double>& grad);
void grouped_nll_hessian(const GroupedHistory& grouped, const std::vector<double>& theta,
                         Eigen::MatrixXd& hess);

struct MleOptions {
    double tolerance = 1e-10;  // sup-norm of the projected gradient step
    int max_iterations = 200;
};

struct MleResult {
    PreferenceVector preferences;
    std::vector<double> theta;
    bool converged = false;
    int iterations = 0;
    double projected_gradient_norm = 0.0;
};

// Box-constrained maximum likelihood fit of the attraction weights, with
// log-weights confined to [-log(bound), log(bound)]. Damped Newton steps with
// a projected-gradient fallback. Throws EstimationUndefinedError when some
// product in 1..n_products never appears in the history.
MleResult fit_mle(const SalesHistory& history, int n_products, double utility_bound,
                  const MleOptions& options = {});
MleResult fit_mle(const GroupedHistory& grouped, double utility_bound,
                  const MleOptions& options = {},
                  const std::vector<double>* warm_theta = nullptr);

// Deviation scale entering every confidence radius. The default folds the
// resource count into the log term; the variant without it is kept because
// both normalizations appear in practice and differ only by a constant.
double compute_psi(double utility_bound, int n_products, long horizon, long lp_budget,
                   int n_resources, double delta, bool fold_resources_into_log = true);

// Per-product radius (sqrt(N)+1) * psi / sqrt(n).
double confidence_radius(long n_observations, double psi, int n_products);

struct OmegaResult {
    double value = 0.0;
    // Tightening above 1 would yield empty capacity; callers clamp and flag.
    bool exceeds_one = false;
};

// Capacity tightening fraction for the planning program.
OmegaResult compute_omega(const ProblemInstance& inst, long warm_start_length, long lp_budget,
                          double psi, double delta);

// Bundle handed to the planning layer. When enabled is false the radii and
// tightening are identically zero and psi/omega are ignored.
struct ConfidenceParams {
    bool enabled = false;
    double psi = 0.0;
    double omega = 0.0;
    double delta = 0.05;

    static ConfidenceParams off() { return {}; }

    // Radius for one product given its exposure count; zero when disabled.
    double radius(long n_observations, int n_products) const;
};

}  // namespace mnlb
