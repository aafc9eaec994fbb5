#pragma once

// Independent reference computations used by the unit tests and the
// acceptance runner. Everything here is written directly from the metric and
// model definitions with plain loops; none of it calls into the library code
// under test.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace attackmap::oracle {

/// Tiny deterministic generator (splitmix64) so oracles do not share the
/// library's random source.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double uniform();
    std::size_t below(std::size_t bound) { return static_cast<std::size_t>(next() % bound); }

private:
    std::uint64_t state_;
};

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

struct MetricsOracle {
    std::vector<ClassScores> per_class;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    std::map<std::size_t, double> ac_at_k;
    /// (true, predicted) -> count, diagonal included.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairs;
};

/// Top-1 = first index of the maximum. A class is in the top k when fewer
/// than k classes outrank it (higher probability, or equal with a lower index).
MetricsOracle brute_force_metrics(const std::vector<std::size_t>& truth, const std::vector<std::vector<double>>& rows,
                                  std::size_t n_classes, const std::vector<std::size_t>& ks);

struct MetricsInstance {
    std::vector<std::size_t> truth;
    std::vector<std::vector<double>> rows;
    std::size_t n_classes = 0;
};

/// 1..max_samples samples over 1..max_classes classes. Rows are normalized
/// and contain deliberate ties about a quarter of the time.
MetricsInstance random_metrics_instance(SplitMix& rng, std::size_t max_samples, std::size_t max_classes);

/// Closed-form multinomial NB posterior with Laplace/Lidstone smoothing:
///   P(c | q) ∝ prior_c * prod_f theta_cf ^ q_f,
///   theta_cf = (N_cf + alpha) / (N_c + alpha * D).
/// Counts are weighted by `sample_weight` (empty = 1); the prior is the
/// weighted class frequency. Classes with no samples get probability 0.
std::vector<double> multinomial_nb_posterior(const std::vector<std::vector<double>>& X, const std::vector<std::size_t>& y,
                                             const std::vector<double>& sample_weight, std::size_t n_classes,
                                             double alpha, const std::vector<double>& query);

/// Closed-form complement NB posterior (unnormalized complement weights):
///   score_c = - sum_f q_f * ln((comp_cf + alpha) / sum_g (comp_cg + alpha)),
/// comp_cf = total count of f outside class c. With a single populated class
/// its log prior is added. Softmax over populated classes.
std::vector<double> complement_nb_posterior(const std::vector<std::vector<double>>& X, const std::vector<std::size_t>& y,
                                            const std::vector<double>& sample_weight, std::size_t n_classes,
                                            double alpha, const std::vector<double>& query);

/// Central-difference gradient of `f` at `x` with step `h`.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h);

/// max |a - n| / max(||a||, ||n||, tiny).
double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

struct SetScores {
    std::size_t n_cu = 0;
    std::size_t n_u = 0;
    std::size_t n_gt = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Document metrics from the set definitions.
SetScores set_scores(const std::set<std::string>& predicted, const std::set<std::string>& truth);

/// Union over sentences of the classes whose probability strictly exceeds theta.
std::set<std::string> thresholded_union(const std::vector<std::vector<double>>& rows,
                                        const std::vector<std::string>& classes, double theta);

}  // namespace attackmap::oracle
