#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace attackmap::oracle {

std::uint64_t SplitMix::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix::uniform() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }

MetricsOracle brute_force_metrics(const std::vector<std::size_t>& truth, const std::vector<std::vector<double>>& rows,
                                  std::size_t n_classes, const std::vector<std::size_t>& ks) {
    const std::size_t n = truth.size();
    std::vector<std::size_t> pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < n_classes; ++c) {
            if (rows[i][c] > rows[i][best]) best = c;
        }
        pred[i] = best;
    }

    MetricsOracle out;
    out.per_class.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& s = out.per_class[c];
        for (std::size_t i = 0; i < n; ++i) {
            if (truth[i] == c && pred[i] == c) ++s.tp;
            if (truth[i] != c && pred[i] == c) ++s.fp;
            if (truth[i] == c && pred[i] != c) ++s.fn;
            if (truth[i] == c) ++s.support;
        }
        s.precision = s.tp + s.fp == 0 ? 0.0 : double(s.tp) / double(s.tp + s.fp);
        s.recall = s.tp + s.fn == 0 ? 0.0 : double(s.tp) / double(s.tp + s.fn);
        s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    }
    double total = 0.0;
    for (const auto& s : out.per_class) total += double(s.support);
    for (const auto& s : out.per_class) {
        out.weighted_precision += double(s.support) * s.precision / total;
        out.weighted_recall += double(s.support) * s.recall / total;
        out.weighted_f1 += double(s.support) * s.f1 / total;
    }
    for (std::size_t i = 0; i < n; ++i) ++out.pairs[{truth[i], pred[i]}];

    for (auto k : ks) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t t = truth[i];
            std::size_t outranked_by = 0;
            for (std::size_t c = 0; c < n_classes; ++c) {
                if (rows[i][c] > rows[i][t] || (rows[i][c] == rows[i][t] && c < t)) ++outranked_by;
            }
            if (outranked_by < k) ++hits;
        }
        out.ac_at_k[k] = double(hits) / double(n);
    }
    return out;
}

MetricsInstance random_metrics_instance(SplitMix& rng, std::size_t max_samples, std::size_t max_classes) {
    MetricsInstance inst;
    inst.n_classes = 1 + rng.below(max_classes);
    const std::size_t n = 1 + rng.below(max_samples);
    const bool coarse = rng.below(4) == 0;
    for (std::size_t i = 0; i < n; ++i) {
        inst.truth.push_back(rng.below(inst.n_classes));
        std::vector<double> row(inst.n_classes);
        double sum = 0.0;
        for (auto& v : row) {
            v = coarse ? double(1 + rng.below(3)) : rng.uniform() + 1e-3;
            sum += v;
        }
        for (auto& v : row) v /= sum;
        inst.rows.push_back(std::move(row));
    }
    return inst;
}

namespace {

std::vector<double> normalize_exp(const std::vector<double>& log_scores, const std::vector<bool>& present) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < log_scores.size(); ++c) {
        if (present[c]) top = std::max(top, log_scores[c]);
    }
    std::vector<double> p(log_scores.size(), 0.0);
    double z = 0.0;
    for (std::size_t c = 0; c < log_scores.size(); ++c) {
        if (present[c]) z += p[c] = std::exp(log_scores[c] - top);
    }
    for (auto& v : p) v /= z;
    return p;
}

struct NbCounts {
    std::vector<std::vector<double>> feature;  // [c][f]
    std::vector<double> class_weight;          // summed sample weight per class
    std::vector<bool> present;
};

NbCounts count(const std::vector<std::vector<double>>& X, const std::vector<std::size_t>& y,
               const std::vector<double>& w, std::size_t n_classes) {
    const std::size_t D = X.empty() ? 0 : X[0].size();
    NbCounts k;
    k.feature.assign(n_classes, std::vector<double>(D, 0.0));
    k.class_weight.assign(n_classes, 0.0);
    k.present.assign(n_classes, false);
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        k.present[y[i]] = true;
        k.class_weight[y[i]] += wi;
        for (std::size_t f = 0; f < D; ++f) k.feature[y[i]][f] += wi * X[i][f];
    }
    return k;
}

}  // namespace

std::vector<double> multinomial_nb_posterior(const std::vector<std::vector<double>>& X, const std::vector<std::size_t>& y,
                                             const std::vector<double>& sample_weight, std::size_t n_classes,
                                             double alpha, const std::vector<double>& query) {
    const auto k = count(X, y, sample_weight, n_classes);
    const std::size_t D = query.size();
    double total = 0.0;
    for (double cw : k.class_weight) total += cw;
    std::vector<double> log_post(n_classes, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (!k.present[c]) continue;
        double n_c = 0.0;
        for (double v : k.feature[c]) n_c += v;
        double lp = std::log(k.class_weight[c] / total);
        for (std::size_t f = 0; f < D; ++f) {
            const double theta = (k.feature[c][f] + alpha) / (n_c + alpha * double(D));
            lp += query[f] * std::log(theta);
        }
        log_post[c] = lp;
    }
    return normalize_exp(log_post, k.present);
}

std::vector<double> complement_nb_posterior(const std::vector<std::vector<double>>& X, const std::vector<std::size_t>& y,
                                            const std::vector<double>& sample_weight, std::size_t n_classes,
                                            double alpha, const std::vector<double>& query) {
    const auto k = count(X, y, sample_weight, n_classes);
    const std::size_t D = query.size();
    std::size_t populated = 0;
    double total = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        populated += k.present[c] ? 1 : 0;
        total += k.class_weight[c];
    }
    std::vector<double> score(n_classes, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (!k.present[c]) continue;
        std::vector<double> comp(D, 0.0);
        for (std::size_t o = 0; o < n_classes; ++o) {
            if (o == c) continue;
            for (std::size_t f = 0; f < D; ++f) comp[f] += k.feature[o][f];
        }
        double denom = 0.0;
        for (std::size_t f = 0; f < D; ++f) denom += comp[f] + alpha;
        double s = 0.0;
        for (std::size_t f = 0; f < D; ++f) s -= query[f] * std::log((comp[f] + alpha) / denom);
        if (populated == 1) s += std::log(k.class_weight[c] / total);
        score[c] = s;
    }
    return normalize_exp(score, k.present);
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                     double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        na += analytic[i] * analytic[i];
        nn += numeric[i] * numeric[i];
    }
    return diff / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
}

SetScores set_scores(const std::set<std::string>& predicted, const std::set<std::string>& truth) {
    SetScores s;
    s.n_u = predicted.size();
    s.n_gt = truth.size();
    std::vector<std::string> common;
    std::set_intersection(predicted.begin(), predicted.end(), truth.begin(), truth.end(), std::back_inserter(common));
    s.n_cu = common.size();
    s.precision = s.n_u ? double(s.n_cu) / double(s.n_u) : 0.0;
    s.recall = s.n_gt ? double(s.n_cu) / double(s.n_gt) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

std::set<std::string> thresholded_union(const std::vector<std::vector<double>>& rows,
                                        const std::vector<std::string>& classes, double theta) {
    std::set<std::string> out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < classes.size(); ++c) {
            if (row[c] > theta) out.insert(classes[c]);
        }
    }
    return out;
}

}  // namespace attackmap::oracle
