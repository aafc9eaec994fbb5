#include "attackmap/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace attackmap {

void softmax_inplace(std::span<double> scores, const std::vector<bool>& mask) {
    auto live = [&](std::size_t c) { return mask.empty() || mask[c]; };
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (live(c)) peak = std::max(peak, scores[c]);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        scores[c] = live(c) ? std::exp(scores[c] - peak) : 0.0;
        total += scores[c];
    }
    for (auto& s : scores) s /= total;
}

namespace {

/// Adds -log softmax(scores)[y] to the loss and returns the probabilities
/// in `scores`.
double cross_entropy(std::span<double> scores, std::size_t y) {
    double peak = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (double s : scores) total += std::exp(s - peak);
    double log_z = peak + std::log(total);
    double loss = log_z - scores[y];
    for (auto& s : scores) s = std::exp(s - log_z);
    return loss;
}

}  // namespace

void LogRegObjective::scores(std::span<const double> theta, std::size_t n_classes, const FeatureVector& x,
                             std::span<double> out) {
    const std::size_t C = n_classes;
    const double* bias = theta.data() + x.dim * C;
    std::copy(bias, bias + C, out.begin());
    for (const auto& e : x.entries) {
        const double* row = theta.data() + static_cast<std::size_t>(e.index) * C;
        for (std::size_t c = 0; c < C; ++c) out[c] += e.weight * row[c];
    }
}

double LogRegObjective::evaluate(std::span<const double> theta, std::span<double> grad) const {
    const std::size_t C = data_.n_classes;
    const std::size_t D = data_.dim;
    const std::size_t N = data_.size();
    const bool want_grad = !grad.empty();
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    std::vector<double> s(C);
    double loss = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto& x = (*data_.features)[i];
        scores(theta, C, x, s);
        const double w = data_.weight(i) / static_cast<double>(N);
        loss += w * cross_entropy(s, data_.labels[i]);
        if (!want_grad) continue;
        s[data_.labels[i]] -= 1.0;
        for (std::size_t c = 0; c < C; ++c) s[c] *= w;
        for (const auto& e : x.entries) {
            double* row = grad.data() + static_cast<std::size_t>(e.index) * C;
            for (std::size_t c = 0; c < C; ++c) row[c] += e.weight * s[c];
        }
        double* gb = grad.data() + D * C;
        for (std::size_t c = 0; c < C; ++c) gb[c] += s[c];
    }
    double sq = 0.0;
    for (std::size_t k = 0; k < D * C; ++k) {
        sq += theta[k] * theta[k];
        if (want_grad) grad[k] += l2_ * theta[k];
    }
    return loss + 0.5 * l2_ * sq;
}

void MlpObjective::forward(std::span<const double> theta, std::size_t dim, std::size_t hidden,
                           std::size_t n_classes, const FeatureVector& x, std::span<double> hidden_out,
                           std::span<double> scores) {
    const std::size_t H = hidden;
    const std::size_t C = n_classes;
    const double* b1 = theta.data() + dim * H;
    const double* w2 = b1 + H;
    const double* b2 = w2 + H * C;
    std::copy(b1, b1 + H, hidden_out.begin());
    for (const auto& e : x.entries) {
        const double* row = theta.data() + static_cast<std::size_t>(e.index) * H;
        for (std::size_t h = 0; h < H; ++h) hidden_out[h] += e.weight * row[h];
    }
    for (auto& a : hidden_out) a = std::max(a, 0.0);
    std::copy(b2, b2 + C, scores.begin());
    for (std::size_t h = 0; h < H; ++h) {
        const double a = hidden_out[h];
        if (a == 0.0) continue;
        const double* row = w2 + h * C;
        for (std::size_t c = 0; c < C; ++c) scores[c] += a * row[c];
    }
}

double MlpObjective::evaluate(std::span<const double> theta, std::span<double> grad) const {
    std::vector<std::size_t> all(data_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return evaluate_batch(theta, grad, all);
}

double MlpObjective::evaluate_batch(std::span<const double> theta, std::span<double> grad,
                                    std::span<const std::size_t> batch) const {
    const std::size_t D = data_.dim;
    const std::size_t H = hidden_;
    const std::size_t C = data_.n_classes;
    const std::size_t w1_size = D * H;
    const std::size_t w2_offset = w1_size + H;
    const std::size_t b2_offset = w2_offset + H * C;
    const bool want_grad = !grad.empty();
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    std::vector<double> a(H), s(C), ga(H);
    double loss = 0.0;
    for (std::size_t i : batch) {
        const auto& x = (*data_.features)[i];
        forward(theta, D, H, C, x, a, s);
        const double w = data_.weight(i) / static_cast<double>(batch.size());
        loss += w * cross_entropy(s, data_.labels[i]);
        if (!want_grad) continue;
        s[data_.labels[i]] -= 1.0;
        for (std::size_t c = 0; c < C; ++c) s[c] *= w;
        for (std::size_t h = 0; h < H; ++h) {
            const double* w2row = theta.data() + w2_offset + h * C;
            double* g2row = grad.data() + w2_offset + h * C;
            double acc = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                g2row[c] += a[h] * s[c];
                acc += w2row[c] * s[c];
            }
            ga[h] = a[h] > 0.0 ? acc : 0.0;
        }
        for (std::size_t c = 0; c < C; ++c) grad[b2_offset + c] += s[c];
        for (const auto& e : x.entries) {
            double* row = grad.data() + static_cast<std::size_t>(e.index) * H;
            for (std::size_t h = 0; h < H; ++h) row[h] += e.weight * ga[h];
        }
        for (std::size_t h = 0; h < H; ++h) grad[w1_size + h] += ga[h];
    }

    double sq = 0.0;
    auto regularize = [&](std::size_t from, std::size_t to) {
        for (std::size_t k = from; k < to; ++k) {
            sq += theta[k] * theta[k];
            if (want_grad) grad[k] += l2_ * theta[k];
        }
    };
    regularize(0, w1_size);
    regularize(w2_offset, b2_offset);
    return loss + 0.5 * l2_ * sq;
}

double gradient_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        diff = std::max(diff, std::abs(analytic[k] - numeric[k]));
        na += analytic[k] * analytic[k];
        nn += numeric[k] * numeric[k];
    }
    return diff / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
}

}  // namespace attackmap
