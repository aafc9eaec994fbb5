#pragma once

// Differentiable training objectives over a flat parameter vector. Exposed
// so that gradients can be checked against finite differences.

#include <cstddef>
#include <span>
#include <vector>

#include "attackmap/textprep.hpp"

namespace attackmap {

/// Shared view over a weighted training set.
struct WeightedSamples {
    const std::vector<FeatureVector>* features = nullptr;
    std::vector<std::size_t> labels;
    /// Per-sample loss weight; empty means all 1.
    std::vector<double> sample_weights;
    std::size_t dim = 0;
    std::size_t n_classes = 0;

    std::size_t size() const noexcept { return labels.size(); }
    double weight(std::size_t i) const { return sample_weights.empty() ? 1.0 : sample_weights[i]; }
};

/// Softmax over `scores` in place, numerically stabilized. Entries with
/// mask[c] == false get probability 0 (mask may be empty).
void softmax_inplace(std::span<double> scores, const std::vector<bool>& mask = {});

/// Multinomial logistic regression:
///   L = (1/N) sum_i s_i CE(softmax(W^T x_i + b), y_i) + (l2/2) ||W||^2
/// Layout: W feature-major (W[j * C + c]) followed by b[c].
class LogRegObjective {
public:
    LogRegObjective(WeightedSamples data, double l2) : data_(std::move(data)), l2_(l2) {}

    std::size_t n_params() const { return (data_.dim + 1) * data_.n_classes; }
    /// Returns the loss; fills `grad` when it is non-empty.
    double evaluate(std::span<const double> theta, std::span<double> grad) const;

    /// Class scores W^T x + b for one sample.
    static void scores(std::span<const double> theta, std::size_t n_classes, const FeatureVector& x,
                       std::span<double> out);

private:
    WeightedSamples data_;
    double l2_;
};

/// One hidden ReLU layer, softmax output:
///   L = (1/N) sum_i s_i CE(softmax(W2^T relu(W1^T x_i + b1) + b2), y_i)
///       + (l2/2) (||W1||^2 + ||W2||^2)
/// Layout: W1 (dim x H, feature-major), b1 (H), W2 (H x C), b2 (C).
class MlpObjective {
public:
    MlpObjective(WeightedSamples data, std::size_t hidden, double l2)
        : data_(std::move(data)), hidden_(hidden), l2_(l2) {}

    std::size_t n_params() const { return param_count(data_.dim, hidden_, data_.n_classes); }
    static std::size_t param_count(std::size_t dim, std::size_t hidden, std::size_t n_classes) {
        return dim * hidden + hidden + hidden * n_classes + n_classes;
    }

    double evaluate(std::span<const double> theta, std::span<double> grad) const;
    /// Loss and gradient over a subset of samples (a minibatch).
    double evaluate_batch(std::span<const double> theta, std::span<double> grad,
                          std::span<const std::size_t> batch) const;

    /// Output scores for one sample; `hidden_out` receives activations.
    static void forward(std::span<const double> theta, std::size_t dim, std::size_t hidden, std::size_t n_classes,
                        const FeatureVector& x, std::span<double> hidden_out, std::span<double> scores);

private:
    WeightedSamples data_;
    std::size_t hidden_;
    double l2_;
};

/// max_k |a_k - n_k| / max(||a||, ||n||, 1e-12) over analytic and numeric
/// (central difference) gradients.
double gradient_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

}  // namespace attackmap
